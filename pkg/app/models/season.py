"""Valores imutáveis de um desfecho de temporada: calendário, cenário, placares e classificação."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from app.core.exceptions import DomainError


class Horizon(str, Enum):
    """Horizonte de cálculo do aproveitamento."""
    SHORT = "short"
    FULL = "full"


class TieBreak(str, Enum):
    """Regra de desempate da classificação."""
    BY_PRE_WIN_PCT_THEN_INDEX = "by_pre_win_pct_then_index"


def _readonly(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Schedule:
    """Seleção x_g dos jogos restantes.

    `selected` é sempre binário; `fractional` guarda o iterado contínuo do
    Frank-Wolfe quando existir.
    """
    selected: np.ndarray
    fractional: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "selected", _readonly(np.rint(np.asarray(self.selected, dtype=float)), np.int8))
        if self.fractional is not None:
            object.__setattr__(self, "fractional", _readonly(self.fractional, float))

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "Schedule":
        """Cria um calendário binário a partir de um vetor 0/1."""
        arr = np.asarray(x, dtype=float)
        if not np.all((arr == 0.0) | (arr == 1.0)):
            raise DomainError("Calendário binário esperado (valores 0/1)")
        return cls(selected=arr)

    @classmethod
    def from_fractional(cls, x: Sequence[float]) -> "Schedule":
        """Cria um calendário a partir de um iterado contínuo (arredondado em `selected`)."""
        arr = np.asarray(x, dtype=float)
        return cls(selected=(arr >= 0.5), fractional=arr)

    @property
    def vector(self) -> np.ndarray:
        """Vetor float usado pelos solvers (fracionário quando houver)."""
        if self.fractional is not None:
            return self.fractional
        return self.selected.astype(float)

    @property
    def is_integral(self) -> bool:
        return self.fractional is None

    @property
    def game_ids(self) -> list[int]:
        return [int(g) for g in np.flatnonzero(self.selected)]

    def __len__(self) -> int:
        return int(self.selected.shape[0])

    def same_selection(self, other: "Schedule") -> bool:
        return bool(np.array_equal(self.selected, other.selected))


@dataclass(frozen=True, eq=False)
class Scenario:
    """Realização ξ: W_g = 1 quando o mandante vence.

    Valores fracionários são aceitos apenas para o pseudo-cenário do MVP (W_g = p_g).
    """
    outcomes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "outcomes", _readonly(self.outcomes, float))

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.outcomes == 0.0) | (self.outcomes == 1.0)))

    def __len__(self) -> int:
        return int(self.outcomes.shape[0])


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Aproveitamentos como razões exatas `numerators / denominator`.

    `tie_key` é o aproveitamento pré-suspensão usado no desempate.
    """
    numerators: np.ndarray
    denominator: int
    tie_key: Optional[np.ndarray] = None

    def __post_init__(self):
        nums = np.asarray(self.numerators)
        dtype = np.int64 if np.issubdtype(nums.dtype, np.integer) else float
        object.__setattr__(self, "numerators", _readonly(nums, dtype))
        if self.tie_key is not None:
            object.__setattr__(self, "tie_key", _readonly(self.tie_key, float))

    @property
    def win_pct(self) -> np.ndarray:
        return self.numerators / float(self.denominator)

    def __len__(self) -> int:
        return int(self.numerators.shape[0])


@dataclass(frozen=True, eq=False)
class Ranking:
    """Posições 1..n (1 = melhor aproveitamento)."""
    rank: np.ndarray
    tie_break: TieBreak = field(default=TieBreak.BY_PRE_WIN_PCT_THEN_INDEX)

    def __post_init__(self):
        object.__setattr__(self, "rank", _readonly(self.rank, np.int64))

    def __len__(self) -> int:
        return int(self.rank.shape[0])
