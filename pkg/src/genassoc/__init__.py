"""Robust genotype-association tests on 2x3 case-control tables.

Seven statistics (CATT_1/2, Pearson, MIN2, MAX3, CMAX, CLRT, MERT), their
asymptotic p-values, exact conditional enumeration p-values, and Monte Carlo
size/power studies.
"""

import numba

# skip the TBB probe (and its version warning) when picking a parallel backend
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .asymptotic import (  # noqa: E402
    DegenerateFrequenciesError,
    GenotypeFreqEstimate,
    QuadratureSpec,
    asymptotic_p,
    p_catt,
    p_cmax,
    p_max3,
    p_mert,
    p_min2,
    p_pearson,
)
from .exact import (  # noqa: E402
    Aborted,
    EnumerationOptions,
    LogFactorialTable,
    Ordering,
    enumerate_exact,
    exact_p,
    exact_p_all,
    hypergeometric_prob,
    permutation_p,
)
from .genetics import (  # noqa: E402
    GeneticModelSpec,
    PenetranceOverflowError,
    PopulationParams,
    hwe_genotype_freqs,
    is_monotone,
    theta_from_model,
)
from .simulation import (  # noqa: E402
    CapExceededError,
    PowerEstimate,
    StudyDesign,
    draw_table,
    estimate_power,
    exact_power,
)
from .statistics import (  # noqa: E402
    StatisticKind,
    catt,
    clrt,
    cmax,
    data_driven_score,
    max3,
    mert,
    min2_statistic,
    pearson,
)
from .tables import (  # noqa: E402
    ContingencyTable,
    Margins,
    count_tables,
    enumerate_tables,
    margins_of,
    max_summands,
)

__version__ = "0.1.0"
