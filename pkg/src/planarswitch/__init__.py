"""Stability of planar randomly switched linear systems."""

from .angular import CaseReport, classify
from .certificates import ContractionCertificate, certificate_drift_check, small_beta_certificate
from .exact import ExactModel, beta_c, chi_exact, jordan, rotations
from .pdmp import LyapunovEstimate, SwitchedSystem, simulate_chi
from .planar import NotHurwitzError, expm2, saddle_criterion, solve_lyapunov
from .products import ProductEstimate, embedded_chain_check, product_lyapunov

__version__ = "0.1.0"
