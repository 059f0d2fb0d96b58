"""Group envy-freeness, group Pareto efficiency and prices of group fairness,
decided exactly by enumerating every allocation of small instances."""
from groupfair.efficiency import (
    AdversaryMode,
    GpeVector,
    GpeVerdict,
    check_gpe,
    check_lottery_gpe,
    gpe_vector,
    group_dominates,
    improve_lottery,
)
from groupfair.envy import ConsistencyError, GefMatrix, GefVerdict, check_gef, exists_gef, gef_taxonomy
from groupfair.groups import WelfareKind, group_cross_utility, group_own_utility, welfare
from groupfair.model import (
    Allocation,
    Instance,
    InstanceError,
    Lottery,
    SizeLimitExceeded,
    additive_instance,
    enumerate_allocations,
    random_instance,
    theorem6_instance,
)
from groupfair.prices import PriceResult, price_fair, price_gef, price_gpe, price_report

__version__ = "0.1.0"
