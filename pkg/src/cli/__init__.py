"""DelaySSM — command-line front end: run configs, pipeline commands, output writers."""
