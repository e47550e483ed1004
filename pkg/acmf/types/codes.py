# Exit code families, one per error domain.
ExitOk = 0
ExitConfig = 2
ExitSolver = 3
ExitBarrier = 4
ExitDiagnostics = 5

# Error codes carried by exceptions and reports.
ParseError = "PARSE_ERROR"
ValidationError = "VALIDATION_ERROR"
GeometryRejected = "GEOMETRY_REJECTED"
MaxPrincipleViolation = "MAX_PRINCIPLE_VIOLATION"
OrderingViolation = "ORDERING_VIOLATION"
ComparisonViolation = "COMPARISON_VIOLATION"
DissipationViolation = "DISSIPATION_VIOLATION"
MonotonicityViolation = "MONOTONICITY_VIOLATION"
SupportViolation = "SUPPORT_VIOLATION"
AvoidanceViolation = "AVOIDANCE_VIOLATION"
GradientBoundExceeded = "GRADIENT_BOUND_EXCEEDED"
BVBoundExceeded = "BV_BOUND_EXCEEDED"
AssumptionViolation = "ASSUMPTION_VIOLATION"
Empty = "EMPTY"
EmptyMesh = "EMPTY_MESH"
NotASingleSphere = "NOT_A_SINGLE_SPHERE"

# Snapshot file header.
SnapshotMagic = b"ACMF"
SnapshotVersion = 1
SnapshotHeaderSize = 64
