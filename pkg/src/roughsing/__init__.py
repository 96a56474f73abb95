"""Rough bilinear singular integrals: shell symbols, wavelet splitting and norm probes."""
from .bilinear import (LineFunction, apply_multiplier, apply_T_j, apply_T_sum, calderon_commutator,
                       direct_pv_quadrature, preset_function)
from .config import RunConfig, load_config
from .kernel import (Lattice, SymbolGrid, compute_K0_hat, compute_m_j0, cz_certificate,
                     envelope_check, eval_m_jk)
from .probe import fit_decay, interpolation_region, probe_operator_norm, random_bandlimited
from .sphere import SphericalFunction, builtin_omega, project_mean_zero
from .split import build_split_report, classify_diag, shell_partition, split_shell, vs_decomposition
from .wavelet import analyze, build_wavelet_pair, coeff_decay_report, synthesize

__version__ = "0.1.0"

__all__ = [
    "LineFunction", "apply_multiplier", "apply_T_j", "apply_T_sum", "calderon_commutator",
    "direct_pv_quadrature", "preset_function", "RunConfig", "load_config", "Lattice",
    "SymbolGrid", "compute_K0_hat", "compute_m_j0", "cz_certificate", "envelope_check",
    "eval_m_jk", "fit_decay", "interpolation_region", "probe_operator_norm",
    "random_bandlimited", "SphericalFunction", "builtin_omega", "project_mean_zero",
    "build_split_report", "classify_diag", "shell_partition", "split_shell",
    "vs_decomposition", "analyze", "build_wavelet_pair", "coeff_decay_report", "synthesize",
]
