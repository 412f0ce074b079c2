"""Exceções de domínio da aplicação."""
from typing import Any, Optional


class SeasonError(Exception):
    """Erro base de todas as operações de conclusão de temporada."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict[str, Any]:
        """Representação serializável para respostas da API e relatórios."""
        return {
            "error": type(self).__name__,
            "detail": self.message,
            "context": {k: _jsonable(v) for k, v in self.context.items()},
        }


class FeasibilityError(SeasonError):
    """Calendário fora do conjunto viável ou metas impossíveis de cumprir."""

    def __init__(self, message: str, teams: Optional[list[int]] = None, **context: Any):
        super().__init__(message, teams=sorted(teams or []), **context)
        self.teams = sorted(teams or [])


class DimensionError(SeasonError):
    """Vetores com dimensões incompatíveis."""


class DomainError(SeasonError):
    """Argumento fora do domínio da função (ex.: x fora de [0,1])."""


class DegenerateInstanceError(SeasonError):
    """Instância de liga em que uma grandeza não está definida."""


class DegenerateDataError(SeasonError):
    """Dados de treino ou avaliação com uma única classe."""


class DataError(SeasonError):
    """Dados insuficientes para a operação solicitada."""


class ConfigError(SeasonError):
    """Configuração inválida."""


class IngestError(SeasonError):
    """Falha de leitura/validação de arquivos de entrada."""

    def __init__(
        self,
        message: str,
        file: Optional[str] = None,
        row: Optional[int] = None,
        **context: Any
    ):
        super().__init__(message, file=file, row=row, **context)
        self.file = file
        self.row = row

    def __str__(self) -> str:
        where = ""
        if self.file:
            where = f" ({self.file}" + (f", linha {self.row}" if self.row else "") + ")"
        return f"{self.message}{where}"


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple, set)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value
