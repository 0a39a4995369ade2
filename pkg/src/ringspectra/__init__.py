"""Model checking over finite residue rings and prime-spectrum analysis.

The package evaluates first-order sentences extended with modular,
majority, and threshold counting quantifiers in Z_m, computes the set of
primes whose residue field satisfies a sentence, and analyzes those sets
with density, thinness, and congruence-classification tools.
"""

from .arith import IntPolynomial, PrimeTable, cyclotomic, frac_mod, sieve
from .constructions import (
    FAMILIES,
    congruence_sentence,
    cyclotomic_sentence,
    exp_family,
    frac_lt,
    mod_count_sentence,
    power_residue_sentence,
    prime_sentence,
    psi_sentence,
    supexp_family,
    theta_sentence,
)
from .density import (
    IDENTITY,
    LOG,
    LOGLOG,
    DensityProfile,
    IntSequence,
    OscillationReport,
    alternating_set,
    density_function,
    density_profile,
    double_exp_sequence,
    fi_spectrum,
    geometric_sequence,
    is_h_thin,
    laux_check,
    oscillation_report,
    pnt_bounds_check,
    pnt_log_thin_surrogate,
    semi_additive_check,
    sequence_from_spec,
    table_density_function,
)
from .errors import (
    DegenerateInputError,
    NoInverseError,
    ParseError,
    ResourceLimitError,
    RingSpectraError,
)
from .evaluate import RingContext, eval_naive, eval_sentence
from .fastengine import eval_fast, eval_fast_bool
from .logic import (
    count_exact,
    formula_to_text,
    free_vars,
    is_sentence,
    parse_formula,
    parse_sentence,
    random_sentence,
    require_sentence,
)
from .spectra import (
    CongruenceClass,
    ExceptionReport,
    Spectrum,
    almost_equal,
    class_spectrum,
    complement,
    exceptional_moduli,
    fit_congruences,
    from_members,
    intersection,
    lagarias_in_B,
    poly_spectrum,
    power_residue_count,
    resolve_workers,
    spectrum,
    union,
)
from .verify import Claim, run_suite

__version__ = "0.1.0"

__all__ = [
    "CongruenceClass",
    "Claim",
    "DegenerateInputError",
    "DensityProfile",
    "ExceptionReport",
    "FAMILIES",
    "IDENTITY",
    "IntPolynomial",
    "IntSequence",
    "LOG",
    "LOGLOG",
    "NoInverseError",
    "OscillationReport",
    "ParseError",
    "PrimeTable",
    "ResourceLimitError",
    "RingContext",
    "RingSpectraError",
    "Spectrum",
    "almost_equal",
    "alternating_set",
    "class_spectrum",
    "complement",
    "congruence_sentence",
    "count_exact",
    "cyclotomic",
    "cyclotomic_sentence",
    "density_function",
    "density_profile",
    "double_exp_sequence",
    "eval_fast",
    "eval_fast_bool",
    "eval_naive",
    "eval_sentence",
    "exceptional_moduli",
    "exp_family",
    "fi_spectrum",
    "fit_congruences",
    "formula_to_text",
    "frac_lt",
    "frac_mod",
    "free_vars",
    "from_members",
    "geometric_sequence",
    "intersection",
    "is_h_thin",
    "is_sentence",
    "lagarias_in_B",
    "laux_check",
    "mod_count_sentence",
    "oscillation_report",
    "parse_formula",
    "parse_sentence",
    "pnt_bounds_check",
    "pnt_log_thin_surrogate",
    "poly_spectrum",
    "power_residue_count",
    "power_residue_sentence",
    "prime_sentence",
    "psi_sentence",
    "random_sentence",
    "require_sentence",
    "resolve_workers",
    "run_suite",
    "semi_additive_check",
    "sequence_from_spec",
    "sieve",
    "spectrum",
    "supexp_family",
    "table_density_function",
    "theta_sentence",
    "union",
]
