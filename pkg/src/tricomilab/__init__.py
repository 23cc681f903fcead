"""tricomilab: numerical laboratory for degenerate wave equations
of generalized Tricomi type, d_t^2 u - t^m Laplace(u) = f(t, x, u)."""

__version__ = "0.1.0"
