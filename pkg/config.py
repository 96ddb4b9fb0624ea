"""
Run configuration: nested sections read from flat `section.key=value` files and
overridable with `--section.key value` command-line flags.
"""
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from exceptions import ConfigError, ToolkitError
from fem import InclusionSpec, SourceTerm, parse_source
from meshing import BoundaryPartition, partition_from_ell
from reconstruction import ReconstructionConfig
from solvers import NewtonConfig
from synth import NoiseSpec

_LOGGER = logging.getLogger(__name__)


@dataclass
class MeshSection:
    h: float = 0.012
    seed: int = 0
    file: str = ""
    # data are generated on a mesh finer by this factor with its own seed
    gen_refinement: float = 1.5
    gen_seed: int = 1


@dataclass
class InclusionSection:
    shape: str = "circle"
    x: float = 0.4
    y: float = 0.3
    scale: float = 0.04
    axis_x: float = 1.0
    axis_y: float = 0.0
    ratio: float = 1.0


@dataclass
class ModelSection:
    k_in: float = 0.1
    margin: float = 0.05
    min_separation: float = 0.05


@dataclass
class SourcesSection:
    terms: str = "F1,F2,F3,F4"


@dataclass
class AlgorithmSection:
    name: str = "alg2"
    incremental: bool = False
    uniform_weights: bool = False
    stop_tolerance: float = 0.02
    tensor: str = "circle"
    flat_tolerance: float = 0.5
    workers: int = 1


@dataclass
class PartitionSection:
    n_arcs: int = 0
    ell: float = 1.0 / 48.0
    offset: float = 0.0


@dataclass
class NewtonSection:
    abs_tol: float = 1e-10
    max_iter: int = 25
    damping: float = 1.0
    max_halvings: int = 8


@dataclass
class NoiseSection:
    p: float = 0.0
    seed: int = 0


@dataclass
class CampaignSection:
    n_runs: int = 20
    base_seed: int = 0
    workers: int = 1


@dataclass
class OracleSection:
    points: str = "0.3,0.2;-0.2,0.4"
    eps: str = "0.02,0.04,0.08"


@dataclass
class OutputSection:
    dir: str = "runs"
    plot_script: bool = False


@dataclass
class RunConfig:
    """Complete parameter surface of a run."""

    mesh: MeshSection = field(default_factory=MeshSection)
    inclusion: InclusionSection = field(default_factory=InclusionSection)
    model: ModelSection = field(default_factory=ModelSection)
    sources: SourcesSection = field(default_factory=SourcesSection)
    algorithm: AlgorithmSection = field(default_factory=AlgorithmSection)
    partition: PartitionSection = field(default_factory=PartitionSection)
    newton: NewtonSection = field(default_factory=NewtonSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    campaign: CampaignSection = field(default_factory=CampaignSection)
    oracle: OracleSection = field(default_factory=OracleSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def set(self, key: str, value: str) -> None:
        """Assign a dotted key from its text value."""
        section_name, _, name = key.partition(".")
        section = getattr(self, section_name, None) if section_name in _section_names() else None
        if section is None or not name:
            raise ConfigError(f"unknown configuration key '{key}'")
        known = {f.name: f for f in fields(section)}
        if name not in known:
            raise ConfigError(f"unknown configuration key '{key}'")
        setattr(section, name, _convert(key, value, type(getattr(section, name))))

    def update(self, pairs: Iterable[Tuple[str, str]]) -> "RunConfig":
        for key, value in pairs:
            self.set(key, value)
        return self

    @classmethod
    def from_file(cls, path: Union[str, Path], overrides: Optional[Iterable[Tuple[str, str]]] = None) -> "RunConfig":
        config = cls()
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read configuration file {path}: {e}")
        config.update(parse_config_text(text))
        if overrides:
            config.update(overrides)
        return config

    # builders for the library objects -------------------------------------------------

    def newton_config(self) -> NewtonConfig:
        return self._build(lambda: NewtonConfig(self.newton.abs_tol, self.newton.max_iter,
                                                self.newton.damping, self.newton.max_halvings))

    def inclusion_spec(self) -> Optional[InclusionSpec]:
        inc = self.inclusion
        if inc.shape == "none":
            return None
        center = (inc.x, inc.y)
        k_in = self.model.k_in
        if inc.shape == "lshape":
            return self._build(lambda: InclusionSpec.lshape(center, inc.scale, k_in))
        if inc.shape == "ellipse":
            return self._build(lambda: InclusionSpec.ellipse(center, inc.scale, (inc.axis_x, inc.axis_y),
                                                             inc.ratio, k_in))
        if inc.shape == "circle":
            return self._build(lambda: InclusionSpec.circle(center, inc.scale, k_in))
        raise ConfigError(f"inclusion.shape must be none, circle, ellipse or lshape, got '{inc.shape}'")

    def source_terms(self) -> List[SourceTerm]:
        # bump(x,y,r) carries commas; split on commas outside parentheses
        terms, depth, current = [], 0, ""
        for ch in self.sources.terms:
            depth += (ch == "(") - (ch == ")")
            if ch == "," and depth == 0:
                terms.append(current)
                current = ""
            else:
                current += ch
        terms.append(current)
        terms = [t.strip() for t in terms if t.strip()]
        if not terms:
            raise ConfigError("sources.terms is empty")
        return [self._build(lambda t=t: parse_source(t)) for t in terms]

    def boundary_partition(self) -> Optional[BoundaryPartition]:
        if self.partition.n_arcs <= 0:
            return None
        return self._build(lambda: partition_from_ell(self.partition.n_arcs, self.partition.ell,
                                                      self.partition.offset))

    def reconstruction_config(self) -> ReconstructionConfig:
        algo = self.algorithm
        inc = self.inclusion
        tensor_shape = algo.tensor
        return self._build(lambda: ReconstructionConfig(
            k_in=self.model.k_in, margin=self.model.margin, newton=self.newton_config(),
            tensor_shape=tensor_shape, tensor_axis=(inc.axis_x, inc.axis_y), tensor_ratio=inc.ratio,
            uniform_weights=algo.uniform_weights, stop_tolerance=algo.stop_tolerance,
            flat_tolerance=algo.flat_tolerance, workers=algo.workers))

    def noise_spec(self, seed: Optional[int] = None, stream: int = 0) -> Optional[NoiseSpec]:
        if self.noise.p == 0.0:
            return None
        return self._build(lambda: NoiseSpec(self.noise.p, self.noise.seed if seed is None else seed, stream))

    def oracle_points(self) -> List[Tuple[float, float]]:
        try:
            points = []
            for chunk in self.oracle.points.split(";"):
                if chunk.strip():
                    x, y = (float(v) for v in chunk.split(","))
                    points.append((x, y))
            return points
        except ValueError:
            raise ConfigError(f"oracle.points must look like 'x1,y1;x2,y2', got '{self.oracle.points}'")

    def oracle_eps(self) -> List[float]:
        try:
            return [float(v) for v in self.oracle.eps.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"oracle.eps must be a comma-separated list, got '{self.oracle.eps}'")

    @staticmethod
    def _build(factory):
        try:
            return factory()
        except ConfigError:
            raise
        except ToolkitError as e:
            raise ConfigError(str(e))


def _section_names() -> List[str]:
    return [f.name for f in fields(RunConfig)]


def _convert(key: str, value: str, kind: type) -> Any:
    text = str(value).strip()
    try:
        if kind is bool:
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"invalid value '{value}' for {key} (expected {kind.__name__})")


def parse_config_text(text: str) -> List[Tuple[str, str]]:
    """Parse `section.key=value` lines; `#` starts a comment."""
    pairs = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'section.key=value', got '{raw.strip()}'")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_override_args(args: List[str]) -> List[Tuple[str, str]]:
    """Turn leftover `--section.key value` / `--section.key=value` flags into pairs."""
    pairs = []
    i = 0
    while i < len(args):
        arg = args[i]
        if not arg.startswith("--") or "." not in arg:
            raise ConfigError(f"unrecognised argument '{arg}'")
        key = arg[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(args):
                raise ConfigError(f"flag '{arg}' needs a value")
            value = args[i + 1]
            i += 2
        pairs.append((key, value))
    return pairs
