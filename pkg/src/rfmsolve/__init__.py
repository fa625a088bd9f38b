"""Random feature collocation with sketch-preconditioned Newton solvers."""
