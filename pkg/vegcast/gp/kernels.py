# builds the kernel expressions searched over by the GP engine.

from enum import Enum

import numpy as np
from sklearn.gaussian_process.kernels import (ConstantKernel, DotProduct, ExpSineSquared, Kernel, Matern,
                                              RationalQuadratic, RBF)

from vegcast.core import InvalidValueError

# one year on the weekly grid, never optimised
PERIOD_WEEKS = 52.0

# natural-unit bounds of scales; variances are squared scales
SCALE_BOUNDS = (1e-4, 1e4)
VARIANCE_BOUNDS = (SCALE_BOUNDS[0] ** 2, SCALE_BOUNDS[1] ** 2)


class Primitive(Enum):
    LINEAR = "LINEAR"
    RBF = "RBF"
    PERIODIC = "PERIODIC"
    RATIONAL_QUADRATIC = "RATIONAL_QUADRATIC"
    MATERN32 = "MATERN32"
    MATERN52 = "MATERN52"

    def __str__(self):
        return self.value

    @staticmethod
    def from_string(value: str) -> "Primitive":
        token = value.strip().upper().replace("-", "_")
        aliases = {"MATERN": "MATERN52", "RQ": "RATIONAL_QUADRATIC", "PER": "PERIODIC"}
        token = aliases.get(token, token)
        try:
            return Primitive[token]
        except KeyError:
            available = ", ".join(p.value for p in Primitive)
            raise InvalidValueError(f"unknown kernel primitive {value!r}. Available primitives: {available}") from None


PRIMITIVES = tuple(Primitive)


def _base(primitive: Primitive, length_scale: float) -> Kernel:
    """Unit-amplitude primitive."""
    if primitive is Primitive.RBF:
        return RBF(length_scale, length_scale_bounds=SCALE_BOUNDS)
    if primitive is Primitive.PERIODIC:
        return ExpSineSquared(length_scale, PERIOD_WEEKS, length_scale_bounds=SCALE_BOUNDS,
                              periodicity_bounds="fixed")
    if primitive is Primitive.RATIONAL_QUADRATIC:
        return RationalQuadratic(length_scale, alpha=1.0, length_scale_bounds=SCALE_BOUNDS,
                                 alpha_bounds=SCALE_BOUNDS)
    if primitive is Primitive.MATERN32:
        return Matern(length_scale, length_scale_bounds=SCALE_BOUNDS, nu=1.5)
    if primitive is Primitive.MATERN52:
        return Matern(length_scale, length_scale_bounds=SCALE_BOUNDS, nu=2.5)
    # LINEAR has no length scale; sigma_0 is its offset
    return DotProduct(sigma_0=1.0, sigma_0_bounds=SCALE_BOUNDS)


def _amplitude(variance: float) -> ConstantKernel:
    variance = float(np.clip(variance, *VARIANCE_BOUNDS))
    return ConstantKernel(variance, constant_value_bounds=VARIANCE_BOUNDS)


def parse_structure(structure: str) -> list[list[Primitive]]:
    """
    Parse a kernel structure string into a sum of products.

    ``"RBF+PERIODIC"`` is a sum of two primitives, ``"RBF*PERIODIC"`` a product,
    ``"RBF"`` a single primitive.

    Returns
    -------
    list[list[Primitive]]
        Summands, each a list of multiplied primitives.
    """
    if not structure or not structure.strip():
        raise InvalidValueError("empty kernel structure")
    return [[Primitive.from_string(p) for p in term.split("*")] for term in structure.split("+")]


def canonical_structure(structure: str) -> str:
    return "+".join("*".join(p.value for p in term) for term in parse_structure(structure))


def build_kernel(structure: str, length_scale: float = 8.0, variance: float = 1.0) -> Kernel:
    """
    Kernel for a structure string.

    Every summand carries its own amplitude; a product of primitives shares a
    single amplitude. ``variance`` is split evenly over the summands.

    Parameters
    ----------
    structure : str
        E.g. ``"RBF+PERIODIC"``.
    length_scale : float, optional
        Initial length scale of every primitive, in weeks.
    variance : float, optional
        Initial total signal variance.

    Returns
    -------
    sklearn.gaussian_process.kernels.Kernel
        The kernel, hyperparameters log-parameterised by scikit-learn.
    """
    terms = parse_structure(structure)
    kernel = None
    for term in terms:
        product = None
        for primitive in term:
            base = _base(primitive, length_scale)
            product = base if product is None else product * base
        summand = _amplitude(variance / len(terms)) * product
        kernel = summand if kernel is None else kernel + summand
    return kernel


def free_hyperparameters(kernel: Kernel) -> list:
    """The optimised hyperparameters of ``kernel`` in ``kernel.theta`` order."""
    return [h for h in kernel.hyperparameters if not h.fixed]


def is_psd(kernel: Kernel, times: np.ndarray, floor: float = -1e-8) -> bool:
    """Whether the Gram matrix of ``times`` is symmetric with smallest eigenvalue above ``floor``."""
    gram = kernel(np.asarray(times, dtype=float).reshape(-1, 1))
    if not np.allclose(gram, gram.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(gram).max())):
        return False
    return float(np.linalg.eigvalsh(gram).min()) >= floor
