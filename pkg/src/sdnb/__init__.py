"""Exact p-adic verification of self-dual integral normal bases.

The package is layered bottom-up: :mod:`sdnb.padic` (scalars),
:mod:`sdnb.fields` (the tower K < K' < L), :mod:`sdnb.series` (Dwork's
series), :mod:`sdnb.lubin_tate`, :mod:`sdnb.galois`, :mod:`sdnb.basis` (the
checks) and :mod:`sdnb.cli`.
"""

from .padic import PadicScalar, scalar_from_rational, teichmueller_lift
from .basis import verify

__all__ = ["PadicScalar", "scalar_from_rational", "teichmueller_lift", "verify"]
__version__ = "0.1.0"
