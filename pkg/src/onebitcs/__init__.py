"""One-bit compressive sensing with tight-frame dictionaries."""
from .frames import TightFrame, analysis, direct_sum, make_harmonic, make_identity, make_random_tight, synthesis
from .measure import SensingEnsemble, OneBitObservation, dithered_measure, sample_ensemble, sgn, sign_measure
from .recover import RecoveryError, RecoveryOutput, ht_direction, ht_full, lp_direction, lp_full, socp_full
from .signals import GroundTruth, direction_error, effective_sparsity, hard_threshold

__version__ = "0.1.0"
