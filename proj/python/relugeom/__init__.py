"""Python bindings for the relugeom C++ core."""

from ._relugeom import (
    AffineMap,
    DecisionBoundary,
    DualFrame,
    GeometryError,
    OutputLayer,
    PreimageSet,
    ReluLayer,
    ReluNetwork,
    canonical_boundary,
    classify,
    dual_frame,
    enumerate_pieces,
    enumerate_sectors,
    equivalent,
    membership_oracle,
    piece_count_oracle,
    preimage_of_point,
    sample_preimage,
    sector_count_table,
)

__all__ = [name for name in dir() if not name.startswith("_")]
