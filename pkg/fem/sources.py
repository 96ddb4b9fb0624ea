"""
Source terms f of the forward problem and the registry that builds them from text.
"""
import re
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List

import numpy as np
from numpy.typing import NDArray

from exceptions import PreconditionError


def _format_parameter(value: float) -> str:
    """Shortest text that reads back to the same float; integral values drop the trailing .0."""
    text = repr(float(value) + 0.0)
    return text[:-2] if text.endswith(".0") else text


class SourceTerm(ABC):
    """Abstract base class for all source terms."""

    def __init__(self, tag: str, description: str):
        self.tag = tag
        self.description = description

    @abstractmethod
    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        """
        Evaluate f at the given points.

        Args:
            x: x coordinates
            y: y coordinates, same shape as x

        Returns:
            Array of f values with the shape of x
        """
        pass

    @property
    def key(self) -> str:
        """Canonical text form; parse_source(key) rebuilds an equal source."""
        return self.tag

    def to_dict(self) -> Dict[str, Any]:
        return {'tag': self.tag, 'key': self.key, 'description': self.description}

    def __eq__(self, other) -> bool:
        return isinstance(other, SourceTerm) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.key})"


class LinearXSource(SourceTerm):
    def __init__(self):
        super().__init__("F1", "f(x, y) = x")

    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        return np.array(x, dtype=np.float64, copy=True)


class LinearYSource(SourceTerm):
    def __init__(self):
        super().__init__("F2", "f(x, y) = y")

    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        return np.array(y, dtype=np.float64, copy=True)


class ProductSource(SourceTerm):
    def __init__(self):
        super().__init__("F3", "f(x, y) = x y")

    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        return np.asarray(x, dtype=np.float64) * np.asarray(y, dtype=np.float64)


class SaddleSource(SourceTerm):
    def __init__(self):
        super().__init__("F4", "f(x, y) = (x^2 - y^2) / 2")

    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return 0.5 * (x * x - y * y)


class BumpSource(SourceTerm):
    """f = 1 - exp(-r_s^2 / |x - x_s|^2), equal to 1 at the source point."""

    def __init__(self, x_s: float, y_s: float, r_s: float):
        if not r_s > 0.0:
            raise PreconditionError(f"bump radius must be positive, got {r_s}")
        if not np.hypot(x_s, y_s) < 1.0:
            raise PreconditionError(f"bump center ({x_s}, {y_s}) lies outside the unit disk")
        super().__init__("bump", "f = 1 - exp(-r_s^2 / ((x - x_s)^2 + (y - y_s)^2))")
        self.x_s = float(x_s)
        self.y_s = float(y_s)
        self.r_s = float(r_s)

    @property
    def key(self) -> str:
        return f"bump({_format_parameter(self.x_s)},{_format_parameter(self.y_s)},{_format_parameter(self.r_s)})"

    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        d2 = (np.asarray(x, dtype=np.float64) - self.x_s) ** 2 + (np.asarray(y, dtype=np.float64) - self.y_s) ** 2
        with np.errstate(divide="ignore"):
            return 1.0 - np.exp(-self.r_s ** 2 / d2)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({'x_s': self.x_s, 'y_s': self.y_s, 'r_s': self.r_s})
        return data


class ConstantSource(SourceTerm):
    def __init__(self, c: float):
        super().__init__("constant", "f(x, y) = c")
        self.c = float(c)

    @property
    def key(self) -> str:
        return f"constant({_format_parameter(self.c)})"

    def evaluate(self, x: NDArray, y: NDArray) -> NDArray:
        return np.full(np.shape(x), self.c, dtype=np.float64)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data['c'] = self.c
        return data


_CALL = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


class SourceManager:
    """Manages all available source term variants."""

    def __init__(self):
        self.factories: Dict[str, Callable[..., SourceTerm]] = {
            'F1': LinearXSource,
            'F2': LinearYSource,
            'F3': ProductSource,
            'F4': SaddleSource,
            'bump': BumpSource,
            'constant': ConstantSource,
        }
        self.arity = {'F1': 0, 'F2': 0, 'F3': 0, 'F4': 0, 'bump': 3, 'constant': 1}

    def get_available_sources(self) -> List[str]:
        """Get list of available source tags."""
        return list(self.factories.keys())

    def get_source_info(self, tag: str) -> Dict[str, Any]:
        """Get information about a source variant."""
        if tag not in self.factories:
            return {'error': f'Source "{tag}" not found'}
        return {
            'tag': tag,
            'parameters': self.arity[tag],
            'description': self._get_source_description(tag),
        }

    def _get_source_description(self, tag: str) -> str:
        descriptions = {
            'F1': 'Linear source f = x',
            'F2': 'Linear source f = y',
            'F3': 'Bilinear source f = x y',
            'F4': 'Saddle source f = (x^2 - y^2) / 2',
            'bump': 'Localized source 1 - exp(-r_s^2 / d^2), parameters x_s, y_s, r_s',
            'constant': 'Uniform source f = c',
        }
        return descriptions.get(tag, 'No description available')

    def parse(self, text: str) -> SourceTerm:
        """
        Build a source from its text form, e.g. `F1`, `bump(0,0,0.3)` or `constant(8)`.

        Raises:
            PreconditionError: unknown tag, wrong parameter count or invalid parameters
        """
        match = _CALL.match(text)
        if not match:
            raise PreconditionError(f"cannot parse source term '{text}'")
        name, args = match.group(1), match.group(2)
        tag = next((t for t in self.factories if t.lower() == name.lower()), None)
        if tag is None:
            raise PreconditionError(
                f"unknown source '{name}', available: {', '.join(self.get_available_sources())}")
        params = [a for a in (args or "").split(",") if a.strip()]
        if len(params) != self.arity[tag]:
            raise PreconditionError(f"source '{tag}' takes {self.arity[tag]} parameters, got {len(params)}")
        try:
            values = [float(p) for p in params]
        except ValueError:
            raise PreconditionError(f"non-numeric parameter in source '{text}'")
        return self.factories[tag](*values)


_DEFAULT_MANAGER = SourceManager()


def parse_source(text: str) -> SourceTerm:
    return _DEFAULT_MANAGER.parse(text)


def polynomial_sources() -> List[SourceTerm]:
    """The four polynomial sources F1..F4 in order."""
    return [LinearXSource(), LinearYSource(), ProductSource(), SaddleSource()]
