# Distinguished solution of a quasi-linear asymptotic ODE over (x, e^x).
# The equation combines a forcing term of order e^-2x with a nonlinear
# perturbation; the solver peels one term per power of e^-x.
basis(x, exp(x));
let P = (x-1)*exp(-2*x) + (1/x - exp(-x) + exp(-x)/x)*d(F) + (1 - x*exp(-x))*F + F*d(F)/x + F^2;
let U = dsolve(P);
expand(U, 5);
