"""Smaller GP parameter h, fewer iterations.

The same 80 samples of (x - 1/2)^2 - 0.1 on [0, 1] are reconstructed in
level-5 spaces built from GP masks with n = 5 and several h.  The
contraction estimate drops with h and so does the iteration count.
"""

from mrsampling.studies import gp_study, make_config

cfg = make_config("gpstudy", {})
for row in gp_study(cfg)["rows"]:
    print(f"h = {row['h']}: contraction {row['eta_hat']:.3f}, {row['iterations']} iterations, "
          f"sup error {row['sup_error']:.1e}")
