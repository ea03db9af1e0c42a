"""Digit statistics of mathematical constants: CLT and LIL tests at scale."""
from .cltscan import (FrequencyTable, HistogramAccumulator, ScanState, deviation,
                      freq_update, freq_variance, hist_accumulate, hist_cumulative,
                      hist_density, scan_update)
from .digitstream import (DigitStream, VerificationReport, bbp_hex_digit, gen_e_digits,
                          gen_pi_digits, gen_sqrt_digits, open_digit_file, verify_prefix)
from .errors import (CheckpointError, DigitLawError, DomainError, ParseError,
                     PrecisionError, ResourceError, UsageError)
from .harness import RunConfig, baseline_digits, run_analysis
from .lilscan import (LilPoint, SuffixExtrema, block_series, lil_delta, lil_divisor,
                      oscillation_summary, suffix_extrema, tail_fraction)
from .moments import (MomentSet, berry_esseen_bound, digit_moments,
                      expected_freq_variance, normal_cdf, normal_pdf)
from .normality import PatternCounter, chi_square, pattern_freq, pattern_scan, z_score

__version__ = "0.1.0"
