"""Experiment files: line-oriented `key = value` settings and the literal grammars."""
import logging
import math
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Tuple

from errors import ConfigError, GridError
from field import ClosedForm, GaussianForm, Grid, HatGaussForm, SampledField, SumForm
from gevrey import GevreySequence
from spaces import BaseSpace, FourierLebesgue, WeightedC0, WeightedLp
from weights import (
    AssocExpWeight,
    ConstantWeight,
    InterpolatedWeight,
    PolynomialWeight,
    SubExponentialWeight,
    Weight,
    fmt_number,
)

logger = logging.getLogger("Config")


def split_top(text: str, sep: str = ",") -> List[str]:
    """Split on sep outside square brackets."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced ']' in {text!r}")
        elif ch == sep and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    if depth:
        raise ValueError(f"unbalanced '[' in {text!r}")
    parts.append(text[start:].strip())
    return [p for p in parts if p]


def _unbracket(item: str) -> str:
    if not (item.startswith("[") and item.endswith("]")):
        raise ValueError(f"expected [literal], got {item!r}")
    return item[1:-1].strip()


def _number(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(key, f"not a number: {text!r}")


def _params(key: str, body: str, allowed: Tuple[str, ...]) -> Dict[str, float]:
    out = {}
    for item in split_top(body):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in allowed:
            raise ConfigError(key, f"unexpected parameter {item!r} (allowed: {', '.join(allowed)})")
        out[name] = _number(key, value.strip())
    return out


def parse_weight(text: str, key: str = "weight") -> Weight:
    """const | poly:<s> | subexp:k=..,sigma=.. | assoc:s=..,tau=..[,sigma=..][,scale=..] | interp:theta=..,[w0],[w1]."""
    text = text.strip()
    kind, _, body = text.partition(":")
    try:
        if kind == "const" and not body:
            return ConstantWeight()
        if kind == "poly":
            return PolynomialWeight(_number(key, body))
        if kind == "subexp":
            p = _params(key, body, ("k", "sigma"))
            return SubExponentialWeight(p.get("k", 0.0), p.get("sigma", 1.0))
        if kind == "assoc":
            p = _params(key, body, ("s", "tau", "sigma", "scale"))
            seq = GevreySequence(sigma=p["sigma"]) if "sigma" in p else GevreySequence()
            return AssocExpWeight(p.get("s", 0.0), p.get("tau", 1.0), seq, p.get("scale", 1.0))
        if kind == "interp":
            items = split_top(body)
            theta = [i for i in items if i.startswith("theta=")]
            inner = [i for i in items if i.startswith("[")]
            if len(theta) != 1 or len(inner) != 2 or len(items) != 3:
                raise ConfigError(key, f"interp needs theta=..,[w0],[w1], got {text!r}")
            return InterpolatedWeight(
                parse_weight(_unbracket(inner[0]), key),
                parse_weight(_unbracket(inner[1]), key),
                _number(key, theta[0].split("=", 1)[1]),
            )
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(key, str(e))
    raise ConfigError(key, f"unknown weight literal {text!r}")


def parse_form(text: str, key: str = "f") -> ClosedForm:
    """gauss:x0=..,xi0=..,a=.. | hatgauss:a=..,s=.. | sum:[lit],[lit],..."""
    text = text.strip()
    kind, _, body = text.partition(":")
    try:
        if kind == "gauss":
            p = _params(key, body, ("x0", "xi0", "a"))
            if p.get("a", 1.0) <= 0:
                raise ConfigError(key, "Gaussian width a must be > 0")
            return GaussianForm(shift=p.get("x0", 0.0), mod=p.get("xi0", 0.0), a=p.get("a", 1.0))
        if kind == "hatgauss":
            p = _params(key, body, ("a", "s"))
            if p.get("a", 1.0) <= 0 or p.get("s", 1.0) <= 0:
                raise ConfigError(key, "hatgauss needs a > 0 and s > 0")
            return HatGaussForm(a=p.get("a", 1.0), s=p.get("s", 1.0))
        if kind == "sum":
            terms = tuple(parse_form(_unbracket(item), key) for item in split_top(body))
            if not terms:
                raise ConfigError(key, "sum needs at least one term")
            return SumForm(terms=terms)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(key, str(e))
    raise ConfigError(key, f"unknown field literal {text!r}")


def form_literal(form: ClosedForm) -> str:
    if complex(form.amp) != 1:
        raise ValueError("only unit-amplitude closed forms have a literal")
    if isinstance(form, GaussianForm):
        return f"gauss:x0={fmt_number(form.shift)},xi0={fmt_number(form.mod)},a={fmt_number(form.a)}"
    if isinstance(form, HatGaussForm) and form.shift == 0 and form.mod == 0:
        return f"hatgauss:a={fmt_number(form.a)},s={fmt_number(form.s)}"
    if isinstance(form, SumForm) and form.shift == 0 and form.mod == 0:
        return "sum:" + ",".join(f"[{form_literal(t)}]" for t in form.terms)
    raise ValueError(f"no literal for {form!r}")


def parse_space(text: str, key: str = "E") -> BaseSpace:
    """lp:p=..,weight=.. | c0:weight=.. | fl1:weight=.. | flq:q=..,weight=.. (weight last)."""
    text = text.strip()
    kind, _, body = text.partition(":")
    head, sep, weight_text = body.partition("weight=")
    weight = parse_weight(weight_text, key) if sep else ConstantWeight()
    p = _params(key, head.rstrip(", "), ("p", "q")) if head.strip(", ") else {}
    try:
        if kind == "lp":
            return WeightedLp(p.get("p", 2.0), weight)
        if kind == "c0" and not p:
            return WeightedC0(weight)
        if kind == "fl1" and not p:
            return FourierLebesgue(1.0, weight)
        if kind == "flq":
            return FourierLebesgue(p.get("q", 1.0), weight)
    except ValueError as e:
        raise ConfigError(key, str(e))
    raise ConfigError(key, f"unknown space literal {text!r}")


def parse_global(text: str, key: str = "p") -> Tuple[float, bool]:
    """'c0' or an exponent p >= 1 ('inf' allowed); returns (p, c0)."""
    text = text.strip()
    if text == "c0":
        return math.inf, True
    p = _number(key, text)
    if not (p >= 1):
        raise ConfigError(key, "p must be ≥ 1")
    return p, False


def _fmt_p(p: float) -> str:
    return "inf" if math.isinf(p) else fmt_number(p)


@dataclass
class ExperimentConfig:
    """All settings of one experiment; every field is an experiment-file key."""
    sigma: float = 1.0
    L: float = 16.0
    delta: float = 0.0625
    weight: Weight = field(default_factory=ConstantWeight)
    f: ClosedForm = field(default_factory=GaussianForm)
    phi: ClosedForm = field(default_factory=GaussianForm)
    chi: ClosedForm = field(default_factory=GaussianForm)
    E: BaseSpace = field(default_factory=WeightedLp)
    p: float = 2.0
    c0: bool = False
    a: float = 1.0
    s: float = 1.0
    L_pts: float = 12.0
    h: float = 0.25
    K: int = 8
    eps: float = 0.1
    outer_margin: float = 4.0
    seed: int = 7

    def __post_init__(self):
        if self.sigma < 1:
            raise ConfigError("sigma", f"sigma must be >= 1, got {self.sigma}")
        if not self.c0 and not (self.p >= 1):
            raise ConfigError("p", "p must be ≥ 1")
        if self.a <= 0:
            raise ConfigError("a", f"lattice step must be > 0, got {self.a}")
        if self.s <= 0:
            raise ConfigError("s", f"smoothing width must be > 0, got {self.s}")

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_settings(cls, settings: Optional[dict]) -> "ExperimentConfig":
        """Defaults from the parsed config.yaml."""
        settings = settings or {}
        seq = settings.get("sequence", {}) or {}
        grid = settings.get("grid", {}) or {}
        ucpu = settings.get("ucpu", {}) or {}
        amalgam = settings.get("amalgam", {}) or {}
        verify = settings.get("verify", {}) or {}
        return cls(
            sigma=float(seq.get("sigma", 1.0)),
            L=float(grid.get("L", 16.0)),
            delta=float(grid.get("delta", 0.0625)),
            a=float(ucpu.get("a", 1.0)),
            s=float(ucpu.get("s", 1.0)),
            L_pts=float(ucpu.get("L_pts", 12.0)),
            outer_margin=float(amalgam.get("outer_margin", 4.0)),
            seed=int(verify.get("seed", 7)),
        )

    def with_values(self, values: Dict[str, str]) -> "ExperimentConfig":
        """Copy with the given `key = value` text settings applied."""
        current = {name: getattr(self, name) for name in self.keys()}
        for key, text in values.items():
            if key not in current:
                raise ConfigError(key, "unknown key")
            current.update(self._parse_value(key, text))
        return ExperimentConfig(**current)

    @staticmethod
    def _parse_value(key: str, text: str) -> Dict[str, object]:
        if key == "weight":
            return {"weight": parse_weight(text, key)}
        if key in ("f", "phi", "chi"):
            return {key: parse_form(text, key)}
        if key == "E":
            return {"E": parse_space(text, key)}
        if key == "p":
            p, c0 = parse_global(text, key)
            return {"p": p, "c0": c0}
        if key == "c0":
            if text.strip() not in ("true", "false"):
                raise ConfigError(key, f"expected true or false, got {text!r}")
            return {"c0": text.strip() == "true"}
        if key in ("K", "seed"):
            try:
                return {key: int(text)}
            except ValueError:
                raise ConfigError(key, f"not an integer: {text!r}")
        return {key: _number(key, text)}

    @classmethod
    def from_text(cls, text: str, base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        values: Dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
            values[key.strip()] = value.strip()
        return (base or cls()).with_values(values)

    def to_text(self) -> str:
        lines = []
        for name in self.keys():
            value = getattr(self, name)
            if name == "weight":
                text = value.literal()
            elif name in ("f", "phi", "chi"):
                text = form_literal(value)
            elif name == "E":
                text = value.literal()
            elif name == "p":
                text = _fmt_p(value)
            elif name == "c0":
                text = "true" if value else "false"
            elif name in ("K", "seed"):
                text = str(value)
            else:
                text = fmt_number(value)
            lines.append(f"{name} = {text}")
        return "\n".join(lines) + "\n"

    def grid(self) -> Grid:
        try:
            return Grid(L=self.L, delta=self.delta)
        except GridError as e:
            raise ConfigError("delta", str(e))

    def sequence(self) -> GevreySequence:
        return GevreySequence(sigma=self.sigma)

    def sample(self, name: str) -> SampledField:
        return SampledField.from_form(self.grid(), getattr(self, name))
