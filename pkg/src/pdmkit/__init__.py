"""Position-dependent-mass Hamiltonians, orderings and radial spectra."""
