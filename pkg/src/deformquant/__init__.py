"""Grid-scale deformation quantization for matrix-valued functions."""
import os as _os

# Thread cap for BLAS/FFT backends; only effective before numpy is first imported.
if _os.environ.get("DEFORMQUANT_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["DEFORMQUANT_THREADS"])

from .algebra import adjoint, cstar_norm, identity
from .grid import (
    FREQUENCY,
    POSITION,
    AliasingWarning,
    GridFunction,
    SkewForm,
    TorusGrid,
    inner_product_E,
    norm_E,
    norm_L2,
    sample,
    seminorm_p,
    seminorm_q,
)
from .fourier import fourier, fourier_inv
from .deform import (
    Composition,
    Dense,
    GridOperator,
    Heisenberg,
    LeftMult,
    LinearCombination,
    RankOne,
    RightMult,
    ad_U,
    deformed_product,
    dense_norm,
    derivation,
    heisenberg_U,
    identity_operator,
    op_L,
    op_R,
    power_norm,
    to_dense,
)
from .mollifier import MollifierFamily, approx_identity_test, derivation_decay_test, make_e_m
from .symbol import (
    PhaseSpaceFunction,
    ProbeSet,
    Verdict,
    commutant_residual,
    cordes_pairing,
    extract_symbol,
    op_from_symbol,
    pairing_bound,
    restrict,
    symbol_convergence_test,
    verify_conjecture,
)

__version__ = "0.1.0"

__all__ = [
    "adjoint",
    "cstar_norm",
    "identity",
    "FREQUENCY",
    "POSITION",
    "AliasingWarning",
    "GridFunction",
    "SkewForm",
    "TorusGrid",
    "inner_product_E",
    "norm_E",
    "norm_L2",
    "sample",
    "seminorm_p",
    "seminorm_q",
    "fourier",
    "fourier_inv",
    "Composition",
    "Dense",
    "GridOperator",
    "Heisenberg",
    "LeftMult",
    "LinearCombination",
    "RankOne",
    "RightMult",
    "ad_U",
    "deformed_product",
    "dense_norm",
    "derivation",
    "heisenberg_U",
    "identity_operator",
    "op_L",
    "op_R",
    "power_norm",
    "to_dense",
    "MollifierFamily",
    "approx_identity_test",
    "derivation_decay_test",
    "make_e_m",
    "PhaseSpaceFunction",
    "ProbeSet",
    "Verdict",
    "commutant_residual",
    "cordes_pairing",
    "extract_symbol",
    "op_from_symbol",
    "pairing_bound",
    "restrict",
    "symbol_convergence_test",
    "verify_conjecture",
]
