"""Model definitions: a discrete level embedded in a continuum, coupled by an
analytically continuable form factor and an optional continuum-continuum kernel.

The registry families are closed forms whose only branch point sits at the
origin (principal square root, cut on the negative real axis), so every
contour of bounded depth stays inside the analytic region.  The coupling
constant multiplies the form factor linearly and the kernel quadratically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contour import ContourSpec
from .errors import AnalyticityError, ConfigError

_REGION_SLACK_RE = 0.05
_REGION_SLACK_IM = 0.05


@dataclass(frozen=True)
class FormFactor:
    """Coupling function between the discrete level and the continuum.

    ``fn`` is the analytic continuation; ``pole_depth`` is the distance from
    the real axis to the nearest singularity off the origin (None = entire up
    to the origin branch point).
    """

    family_id: str
    params: tuple
    fn: Callable = field(repr=False)
    pole_depth: float | None = None

    def eval(self, z):
        return self.fn(z)


@dataclass(frozen=True)
class FormFactor2:
    """Continuum-continuum kernel, jointly analytic in both arguments.

    Registry kernels must be regular (no delta component on the diagonal) and
    Hermitian on the real axis.
    """

    family_id: str
    fn2: Callable = field(repr=False)

    def eval2(self, z, zp):
        return self.fn2(z, zp)


def _sqrt_exp(params):
    a = params[0] if params else 1.0
    return lambda z: np.sqrt(z + 0j) * np.exp(-0.5 * a * np.asarray(z, dtype=complex))


def _poly_exp(params):
    a = params[0] if params else 1.0
    return lambda z: np.asarray(z, dtype=complex) * np.exp(-a * np.asarray(z, dtype=complex))


def _lorentz_sqrt(params):
    s = params[0]
    return lambda z: np.sqrt(z + 0j) / (1.0 + (np.asarray(z, dtype=complex) / s) ** 2)


FAMILIES: dict[str, dict] = {
    "sqrt_exp": {"build": _sqrt_exp, "n_params": (0, 1), "pole_depth": lambda p: None},
    "poly_exp": {"build": _poly_exp, "n_params": (0, 1), "pole_depth": lambda p: None},
    "lorentz_sqrt": {"build": _lorentz_sqrt, "n_params": (1, 1),
                     "pole_depth": lambda p: float(p[0])},
}


def make_form_factor(family_id: str, params=()) -> FormFactor:
    if family_id not in FAMILIES:
        raise ConfigError(f"unknown form-factor family {family_id!r}; "
                          f"registered: {sorted(FAMILIES)}")
    entry = FAMILIES[family_id]
    lo, hi = entry["n_params"]
    params = tuple(float(p) for p in params)
    if not lo <= len(params) <= hi:
        raise ConfigError(f"family {family_id!r} takes {lo}..{hi} params, got {len(params)}")
    if any(p <= 0 for p in params):
        raise ConfigError(f"family {family_id!r} params must be positive, got {params}")
    return FormFactor(family_id, params, entry["build"](params), entry["pole_depth"](params))


def form_factor_from_callable(fn: Callable, name: str = "custom",
                              pole_depth: float | None = None) -> FormFactor:
    """Wrap a closed-form analytic continuation supplied by another module."""
    return FormFactor(name, (), fn, pole_depth)


def separable_test_kernel() -> FormFactor2:
    """The built-in separable kernel h(z) h(z'), h(z) = sqrt(z) exp(-z/2).

    Separability keeps every second-order double integral one dimensional and
    the kernel is manifestly regular on the diagonal.
    """
    h = _sqrt_exp((1.0,))
    return FormFactor2("separable_sqrt_exp", lambda z, zp: h(z) * h(zp))


@dataclass(frozen=True)
class ModelSpec:
    """The tuple (level, coupling, form factor, optional kernel, contour)."""

    omega_level: float
    coupling: float
    form_factor: FormFactor
    kernel: FormFactor2 | None = None
    contour: ContourSpec = field(default_factory=ContourSpec)

    def __post_init__(self):
        if not self.omega_level > 0:
            raise ConfigError(f"omega_level must be positive, got {self.omega_level}")
        if self.coupling < 0:
            raise ConfigError(f"coupling must be non-negative, got {self.coupling}")
        if self.contour.cutoff <= self.omega_level:
            raise ConfigError("contour cutoff must exceed the discrete level")
        pd = self.form_factor.pole_depth
        if pd is not None and pd <= self.contour.depth:
            raise AnalyticityError(
                f"form factor {self.form_factor.family_id!r} has a singularity at depth "
                f"{pd}, inside the contour depth {self.contour.depth}")

    def has_kernel(self) -> bool:
        return self.kernel is not None and self.coupling > 0

    def in_region(self, z: complex) -> bool:
        sre = _REGION_SLACK_RE * max(1.0, self.contour.cutoff)
        sim = max(_REGION_SLACK_IM * self.contour.depth, 1e-2)
        return (-0.01 <= z.real <= self.contour.cutoff + sre
                and abs(z.imag) <= self.contour.depth + sim)


def default_contour(omega_level: float, n_nodes: int = 200, depth: float = 0.5,
                    shape: str = "rectangle") -> ContourSpec:
    """Default path: rectangle of depth 0.5 truncated at max(20, 10*level)."""
    return ContourSpec(depth=depth, cutoff=max(20.0, 10.0 * omega_level),
                       shape=shape, n_nodes=n_nodes)


def make_model(family_id: str, params, omega_level: float, coupling: float,
               contour_spec: ContourSpec | None = None,
               kernel: FormFactor2 | str | None = None) -> ModelSpec:
    """Validated model construction from registry identifiers."""
    ff = make_form_factor(family_id, params)
    if contour_spec is None:
        contour_spec = default_contour(omega_level)
    if isinstance(kernel, str):
        if kernel != "separable_sqrt_exp":
            raise ConfigError(f"unknown kernel {kernel!r}")
        kernel = separable_test_kernel()
    return ModelSpec(omega_level=float(omega_level), coupling=float(coupling),
                     form_factor=ff, kernel=kernel, contour=contour_spec)


def model_from_dict(doc: dict) -> ModelSpec:
    """Model from a JSON-style document.

    Keys: family (str), params (list, optional), omega (float), epsilon (float),
    contour {depth, cutoff, n_nodes, shape} (optional), kernel (str, optional).
    Unknown keys are rejected.
    """
    allowed = {"family", "params", "omega", "epsilon", "contour", "kernel"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown model keys {sorted(unknown)}; allowed {sorted(allowed)}")
    for key in ("family", "omega", "epsilon"):
        if key not in doc:
            raise ConfigError(f"model document missing required key {key!r}")
    cspec = None
    if "contour" in doc:
        cdoc = doc["contour"]
        callowed = {"depth", "cutoff", "n_nodes", "shape"}
        cunknown = set(cdoc) - callowed
        if cunknown:
            raise ConfigError(f"unknown contour keys {sorted(cunknown)}")
        base = default_contour(float(doc["omega"]))
        cspec = ContourSpec(depth=float(cdoc.get("depth", base.depth)),
                            cutoff=float(cdoc.get("cutoff", base.cutoff)),
                            shape=str(cdoc.get("shape", base.shape)),
                            n_nodes=int(cdoc.get("n_nodes", base.n_nodes)))
    return make_model(doc["family"], doc.get("params", ()), float(doc["omega"]),
                      float(doc["epsilon"]), cspec, doc.get("kernel"))


def _check_region(model: ModelSpec, z):
    zs = np.asarray(z, dtype=complex)
    sre = _REGION_SLACK_RE * max(1.0, model.contour.cutoff)
    sim = max(_REGION_SLACK_IM * model.contour.depth, 1e-2)
    ok = ((zs.real >= -0.01) & (zs.real <= model.contour.cutoff + sre)
          & (np.abs(zs.imag) <= model.contour.depth + sim))
    if not np.all(ok):
        bad = np.atleast_1d(zs)[~np.atleast_1d(ok)][:3]
        raise AnalyticityError(f"evaluation point(s) {bad} outside the declared "
                               "analyticity region of the model")


def eval_V(model: ModelSpec, z):
    """Coupling function at complex z inside the analyticity strip."""
    _check_region(model, z)
    return model.coupling * model.form_factor.eval(z)


def eval_Vbar(model: ModelSpec, z):
    """Conjugate-extension rule: conj(V(conj z)).  Equals eval_V for families
    that are real on the positive axis."""
    zc = np.conj(np.asarray(z, dtype=complex))
    _check_region(model, zc)
    return np.conj(model.coupling * model.form_factor.eval(zc))


def eval_V2(model: ModelSpec, z, zp):
    """Continuum-continuum kernel with its quadratic coupling factor."""
    if model.kernel is None:
        return np.zeros(np.broadcast(np.asarray(z), np.asarray(zp)).shape, dtype=complex) \
            if (np.ndim(z) or np.ndim(zp)) else 0j
    return model.coupling ** 2 * model.kernel.eval2(z, zp)
