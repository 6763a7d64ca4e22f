import math

config = {
    "numerics": {
        "n_trap": 5,
        # dt = dt_kappa_fraction / kappa in units of 1/nu
        "dt_kappa_fraction": 0.005,
        "record_every": 200,
        "horizon_factor": 5.0,
        "min_horizon": 100.0,
        "max_horizon": 2.0e4,
        "transient_kappa_periods": 10.0,
        "fit_mode": "auto",
    },
    "sweep": {
        "delta_min": -3.0,
        "delta_max": 1.0,
        "delta_c_min": -30.0,
        "delta_c_max": 30.0,
        "points": 41,
        "max_failed_fraction": 0.2,
        "omega_axis": (0.05, 0.1, 0.2, 0.3, 0.5),
    },
    "convergence": {
        "n_trap_list": (4, 5, 6, 7),
        "tolerance": 0.02,
    },
    "comparison": {
        "tolerance": 0.1,
        "omega_validity": 0.01,
    },
    # COS set-up: optical lattice at 532 nm, high-finesse IR resonator
    "setup": {
        "molecule": "COS",
        "trap_frequency_hz": 350.0e3,
        "trap_depth_uk": 900.0,
        "trap_wavelength_nm": 532.0,
        "cavity_field": 150.0,
        "cavity_linewidth_hz": 5.0e6,
        "phi": math.pi / 4,
        "theta_l": math.pi / 4,
        "theta_c": math.pi / 4,
    },
}
