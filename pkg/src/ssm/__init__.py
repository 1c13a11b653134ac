"""DelaySSM — spectral submanifold parameterization and reduced-order models."""
