"""DelaySSM — chain-method discretization of the delay line."""
