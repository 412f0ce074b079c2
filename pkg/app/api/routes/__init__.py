"""Módulo de rotas da API."""
from app.api.routes.health import router as health_router
from app.api.routes.metrics import router as metrics_router
from app.api.routes.schedules import router as schedules_router

__all__ = [
    "health_router",
    "metrics_router",
    "schedules_router",
]
