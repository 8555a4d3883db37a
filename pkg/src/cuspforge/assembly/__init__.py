"""Graph-of-blocks assemblies: schedules, series verdicts, matched truncations and chains."""

from .chain import (
    ChainModel,
    cgvd_diagnostic,
    displacement_growth_check,
    growth_truncation_planner,
    margulis_threshold,
)
from .graphs import GraphPlan
from .matching import BlockTemplate, matching_truncation, plan_assembly
from .schedules import ScaleSchedule, cyclic_cover_schedule
from .series import completeness_series, total_volume

__all__ = [
    "BlockTemplate",
    "ChainModel",
    "GraphPlan",
    "ScaleSchedule",
    "cgvd_diagnostic",
    "completeness_series",
    "cyclic_cover_schedule",
    "displacement_growth_check",
    "growth_truncation_planner",
    "margulis_threshold",
    "matching_truncation",
    "plan_assembly",
    "total_volume",
]
