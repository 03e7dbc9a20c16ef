from .classical import (ClassicalDecomposer, ClassicalDecomposition, decompose_classical,
                        detect_period, reconstruct_classical)
from .emd import (EEMDDecomposer, EemdConfig, FineToCoarseSplit, ImfSet, build_envelopes, eemd,
                  emd, find_extrema, fine_to_coarse, imf_check)

__all__ = [
    "ClassicalDecomposer", "ClassicalDecomposition", "decompose_classical", "detect_period",
    "reconstruct_classical",
    "EEMDDecomposer", "EemdConfig", "FineToCoarseSplit", "ImfSet", "build_envelopes", "eemd",
    "emd", "find_extrema", "fine_to_coarse", "imf_check",
]
