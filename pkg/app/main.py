"""Aplicação principal FastAPI do otimizador de conclusão de temporada."""
from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from loguru import logger

from app.api.routes import health_router, metrics_router, schedules_router
from app.core.config import settings
from app.core.exceptions import SeasonError
from app.core.logging import setup_logging

setup_logging()

# Criação da aplicação
app = FastAPI(
    title=settings.PROJECT_NAME,
    description="Seleção de jogos restantes para concluir uma temporada suspensa",
    version=settings.VERSION,
    debug=settings.DEBUG,
    docs_url=f"{settings.API_V1_PREFIX}/docs",
    redoc_url=f"{settings.API_V1_PREFIX}/redoc",
    openapi_url=f"{settings.API_V1_PREFIX}/openapi.json"
)

# Middleware CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"] if settings.DEBUG else [],
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
)


@app.exception_handler(SeasonError)
async def season_error_handler(request: Request, exc: SeasonError) -> JSONResponse:
    """Erros de domínio viram 422 com o contexto do erro."""
    logger.warning(f"{request.url.path}: {type(exc).__name__}: {exc.message}")
    return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content=exc.to_dict())


# Rotas da API
app.include_router(schedules_router, prefix=settings.API_V1_PREFIX)
app.include_router(metrics_router, prefix=settings.API_V1_PREFIX)
app.include_router(health_router)


@app.get("/", tags=["Sistema"])
async def root():
    """Endpoint raiz com informações básicas da API."""
    return {
        "name": settings.PROJECT_NAME,
        "version": settings.VERSION,
        "status": "online",
        "docs": f"{settings.API_V1_PREFIX}/docs",
        "redoc": f"{settings.API_V1_PREFIX}/redoc"
    }
