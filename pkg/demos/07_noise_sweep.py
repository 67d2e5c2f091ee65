# End-to-end identification of a bump coefficient across noise levels.
#
# Each run adds noise, builds T_u, assembles the Galerkin normal system,
# solves along the alpha grid and keeps the balancing-principle choice. The
# median error over seeds should drop as delta decreases. Equivalent to
#   coefid sweep --config demos/bump.ini --out sweep_out

from pathlib import Path

from coefid.experiments import convergence_study, load_config

cfg = load_config(Path(__file__).with_name("bump.ini"))
res = convergence_study(cfg, cfg.deltas, write=False)
for delta, err in zip(res.sweep, res.summary["median_error"]):
    print(f"delta={delta:.0e} median error={err:.4f}")
print("log-log slope:", res.summary["slope_error"])
