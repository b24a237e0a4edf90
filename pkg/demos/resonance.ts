# Resonance: the distinguished solution of  d(F) + F = 1/x  needs log x
# (the indicial root 1 collides with the forcing exponent); the solver
# inserts the logarithm and returns log(x)/x - log-free terms follow.
basis(x);
let W = dsolve(d(F) + F - 1/x);
expand(W, 3);
