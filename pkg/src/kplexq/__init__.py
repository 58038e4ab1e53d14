"""Maximum k-plex workbench: Grover oracle circuits, QUBO models, simulated annealing."""
