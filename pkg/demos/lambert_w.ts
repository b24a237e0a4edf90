# Zero-testing pipeline: adjoin U, then the solution V of a second
# quasi-linear equation built from U, and decide that
# (U + 1 - x e^-x)(1 + V) = 1 holds identically.
# Run with --trace to see the six decision steps and the threshold sigma.
basis(x, exp(x));
let P = (x-1)*exp(-2*x) + (1/x - exp(-x) + exp(-x)/x)*d(F) + (1 - x*exp(-x))*F + F*d(F)/x + F^2;
let U = dsolve(P);
let Omega = exp(x)*(U + d(U)/x)*(F + 1) - d(F)/x;
let V = dsolve(Omega);
expand(V, 4);
zerotest((U + 1 - x*exp(-x))*(1 + V) - 1);
# perturbed inputs must fail
zerotest((U + 1 - x*exp(-x))*(1 + V) - 1 + exp(-5*x));
zerotest((U + 1 - x*exp(-x))*(1 + V) - 1 + 1/x);
