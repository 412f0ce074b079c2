"""Modulo de testes da aplicação."""