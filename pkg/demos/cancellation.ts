# Infinite cancellation: expanded termwise, the difference below starts
# with infinitely many zero coefficients; the exact base field arithmetic
# detects the cancellation and the first surviving term is e^-x/(1-1/x)^2.
basis(x, exp(x));
expand(1/(1 - 1/x - exp(-x)) - 1/(1 - 1/x), 3);
