"""DelaySSM — predictions read from the reduced-order model."""
