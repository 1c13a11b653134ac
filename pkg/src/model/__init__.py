"""DelaySSM — delay differential equation models."""
