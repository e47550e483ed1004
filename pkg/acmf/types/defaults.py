from dataclasses import dataclass


@dataclass(frozen=True)
class Defaults:
    """
    Defaults holds every tolerance and knob a scenario file may leave out.
    """

    # cfl_safety scales the stability bound min(h^2/(2d), eps^2/8).
    cfl_safety: float = 0.9

    # record_every is the number of solver steps between diagnostic records.
    record_every: int = 50

    # tol_dissip, tol_mono and tol_avoid are the relative tolerances of the
    # energy, monotonicity and obstacle-avoidance checks.
    tol_dissip: float = 1e-3
    tol_mono: float = 1e-3
    tol_avoid: float = 1e-3

    # energy_slack is the energy increase allowed between records of an
    # unforced run, relative to E(0).
    energy_slack: float = 1e-6

    # avoid_phase_tol is how far |phi| may fall below 1 inside a shrunk obstacle.
    avoid_phase_tol: float = 1e-3

    # tol_ordering is the margin by which phi_0 may cross a barrier.
    tol_ordering: float = 1e-12

    # comparison_h2 is the comparison tolerance in units of h^2.
    comparison_h2: float = 10.0

    # gradient_limit bounds max eps |grad phi| once t >= eps^2.
    gradient_limit: float = 1.2

    # sweep_ratio is eps/h kept fixed by convergence sweeps.
    sweep_ratio: float = 8.0


PreconfiguredDefaults = Defaults()
