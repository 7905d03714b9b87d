"""Physical parameters and the two master-equation variants.

Both generators share the same eigenvalue structure; they differ only in
the complex displacement ``beta`` and the pure dephasing rate ``gamma_phi``
returned by :func:`derive_constants`.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass


class BornApproximationWarning(UserWarning):
    """Mechanical damping comparable to the mechanical frequency."""


class MEVariant(enum.Enum):
    PHENOMENOLOGICAL = "ph"
    DRESSED_STATE = "ds"

    @classmethod
    def parse(cls, value) -> "MEVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "ph": cls.PHENOMENOLOGICAL,
            "phme": cls.PHENOMENOLOGICAL,
            "phenomenological": cls.PHENOMENOLOGICAL,
            "ds": cls.DRESSED_STATE,
            "dsme": cls.DRESSED_STATE,
            "dressed": cls.DRESSED_STATE,
            "dressed_state": cls.DRESSED_STATE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown master-equation variant {value!r}") from None


@dataclass(frozen=True)
class ModelParams:
    """Rates and frequencies of the lossy optomechanical cavity.

    All quantities are in units of the mechanical frequency when
    ``nu == 1``.

    Attributes
    ----------
    omega : float
        Optical mode frequency.
    nu : float
        Mechanical frequency.
    chi : float
        Single-photon optomechanical coupling.
    kappa : float
        Cavity energy decay rate (zero-temperature bath).
    gamma : float
        Mechanical damping rate.
    mbar : float
        Mean thermal phonon number of the mechanical bath.
    variant : MEVariant
        Which Lindblad generator to use.
    """

    omega: float = 0.0
    nu: float = 1.0
    chi: float = 0.0
    kappa: float = 0.01
    gamma: float = 0.01
    mbar: float = 0.0
    variant: MEVariant = MEVariant.DRESSED_STATE

    def __post_init__(self):
        object.__setattr__(self, "variant", MEVariant.parse(self.variant))

    @property
    def is_dressed(self) -> bool:
        return self.variant is MEVariant.DRESSED_STATE


@dataclass(frozen=True)
class DerivedConstants:
    beta: complex
    gamma_phi: float


def derive_constants(params: ModelParams) -> DerivedConstants:
    """Displacement ``beta`` and dephasing rate ``gamma_phi`` of a variant.

    The phenomenological model has ``beta = chi / (nu - i gamma / 2)`` and
    ``gamma_phi = (mbar + 1/2) |beta|^2 gamma``. The dressed-state model has
    a real ``beta = chi / nu`` and
    ``gamma_phi = 2 beta^2 gamma / ln((mbar + 1) / mbar)``, which tends to
    zero as ``mbar -> 0``.
    """
    chi, nu, gamma, mbar = params.chi, params.nu, params.gamma, params.mbar
    if params.variant is MEVariant.PHENOMENOLOGICAL:
        beta = complex(chi / complex(nu, -gamma / 2))
        gamma_phi = (mbar + 0.5) * abs(beta) ** 2 * gamma
    else:
        beta = complex(chi / nu, 0.0)
        if mbar == 0:
            gamma_phi = 0.0
        else:
            # log1p(mbar) - log(mbar) stays accurate for tiny and huge mbar
            gamma_phi = 2 * beta.real**2 * gamma / (math.log1p(mbar) - math.log(mbar))
    return DerivedConstants(beta=beta, gamma_phi=float(gamma_phi))


def validate_params(params: ModelParams, warn: bool = True) -> list[str]:
    """Return every violated parameter constraint (empty when valid).

    A :class:`BornApproximationWarning` is emitted when ``gamma >= nu / 2``.
    """
    errors = []
    fields = {
        "omega": params.omega,
        "nu": params.nu,
        "chi": params.chi,
        "kappa": params.kappa,
        "gamma": params.gamma,
        "mbar": params.mbar,
    }
    for name, value in fields.items():
        try:
            finite = math.isfinite(value)
        except TypeError:
            errors.append(f"{name} must be a real number, got {value!r}")
            continue
        if not finite:
            errors.append(f"{name} must be finite, got {value!r}")
    if errors:
        return errors
    if params.nu <= 0:
        errors.append("nu must be > 0")
    for name in ("chi", "kappa", "gamma", "mbar"):
        if fields[name] < 0:
            errors.append(f"{name} must be ≥ 0")
    if warn and not errors and params.gamma >= params.nu / 2:
        warnings.warn(
            f"gamma/nu = {params.gamma / params.nu:.3g}: damping this strong is "
            "outside the Born approximation both master equations rely on",
            BornApproximationWarning,
            stacklevel=2,
        )
    return errors


def require_valid(params: ModelParams) -> None:
    errors = validate_params(params, warn=False)
    if errors:
        raise ValueError("invalid model parameters: " + "; ".join(errors))
