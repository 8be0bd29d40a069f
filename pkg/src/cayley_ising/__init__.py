"""Ising model with competing sibling and nearest-neighbour interactions on the
order-two Cayley tree: finite-volume Gibbs measures, boundary-law fixed points,
phase regions, and von Neumann factor types of the associated states."""

from .errors import CayleyIsingError, DomainError, RegionError, ResourceLimitError
from .factors import (
    CommensurabilityResult,
    FactorClassification,
    FactorProbabilities,
    FactorType,
    classify,
    find_commensurable,
    log_ratios,
    modular_period,
    probabilities,
    reproduce_equal_coupling_example,
    reproduce_zero_j_example,
    subfactor_exponent,
    verify_power_parametrization,
)
from .gibbs import (
    ConsistencyReport,
    FiniteVolumeMeasure,
    GroundConfig,
    ZeroTScan,
    check_consistency,
    ground_configuration,
    measure_of,
    named_measures,
    root_marginal,
    zero_temperature_scan,
)
from .model import (
    BoundarySets,
    ConfigStats,
    Configuration,
    ModelParams,
    boundary_sets,
    check_bond_inequality,
    energy,
    stats,
)
from .recursion import (
    ConstantField,
    ExplicitField,
    ParityField,
    Region,
    RegionClass,
    classify_periodic_measures,
    classify_region,
    kernel,
    solve_periodic,
    solve_ti,
    verify_recursion,
)
from .tree import ROOT, SubgroupDescriptor, Vertex, enumerate_levels, nn_bonds, ternary_bonds

__version__ = "0.1.0"
