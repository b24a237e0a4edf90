# Exponentials and logarithms with automatic basis extension.
basis(x);
# purely small argument: a plain power series
let w = exp(1/x);
expand(w, 5);
# the logarithm of x^2(1 + 1/x) needs log(x) in the basis; it is inserted
# in front automatically
log(x^2*(1 + 1/x));
