"""DelaySSM — spectra of the chain system and characteristic-root oracles."""
