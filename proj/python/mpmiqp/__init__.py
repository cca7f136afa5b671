"""Shortest-path solver for MIQPs whose cost matrix is (block) factorizable."""

from ._mpmiqp import (
    AssumptionError,
    BlockFactorizableSpec,
    DimensionError,
    Error,
    FactorizableSpec,
    InvalidArgumentError,
    ProjectedMIQP,
    SizeGuardError,
    build_miqp,
    build_socp,
    enumerate_supports,
    gen_calcium,
    gen_hev,
    load_instance,
    load_instance_file,
    run_cli,
    solve,
)

__all__ = [
    "AssumptionError",
    "BlockFactorizableSpec",
    "DimensionError",
    "Error",
    "FactorizableSpec",
    "InvalidArgumentError",
    "ProjectedMIQP",
    "SizeGuardError",
    "build_miqp",
    "build_socp",
    "enumerate_supports",
    "gen_calcium",
    "gen_hev",
    "load_instance",
    "load_instance_file",
    "run_cli",
    "solve",
]
