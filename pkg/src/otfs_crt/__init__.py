"""Cross-subframe OTFS delay/Doppler estimation with co-prime grids and CRT recovery."""
from .crt import ResidueSystem, crt_solve, ext_gcd, lcm_all, mod_inverse, to_centered
from .ddcore import (
    SPEED_OF_LIGHT,
    DDGrid,
    SubframeConfig,
    TapDecomposition,
    TargetParams,
    add_awgn,
    dd_response,
    decompose_taps,
    effective_gain,
    sample_w_nu,
    sample_w_tau,
    taps_from_physical,
)
from .estimator import (
    CombinedEstimate,
    SubframeEstimate,
    combine_delay,
    combine_doppler,
    estimate_layout,
    estimate_subframe,
    to_physical,
    whole_frame_estimate,
)
from .frames import (
    Cell,
    DetectionType,
    FrameLayout,
    GuardSpec,
    assemble_tx,
    build_layout,
    build_type1,
    build_type2,
    build_type3,
    unambiguous_limits,
)
from .harness import (
    Case,
    Scenario,
    SweepResult,
    analytic_report,
    draw_scenario,
    nmse,
    normalized_mse,
    run_trial,
    sweep_snr,
)
from .presets import preset_layout

__version__ = "0.1.0"
