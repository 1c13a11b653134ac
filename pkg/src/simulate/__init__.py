"""DelaySSM — reference solvers and steady-state post-processing."""
