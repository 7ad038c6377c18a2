"""Expression corpus shared by the parser tests and the acceptance suite."""

EXPRESSIONS = [
    "x",
    "t",
    "pi",
    "2.5",
    "-x",
    "t^4*sin(pi*x)",
    "sin(pi*x)*t^2",
    "t^4*x^3*(1-x)^3",
    "t^4*x*(1-x)",
    "x*(1-x)",
    "exp(-t)*cos(2*pi*x)",
    "exp(t*x) - 1",
    "sin(t)*sin(3*pi*x) + cos(t)*x^2",
    "(t + x)^5",
    "t^3 - x",
    "1/(1 + x^2)",
    "t/(2 + sin(x))",
    "-t^2 + 3*x - 4",
    "2*t - -x",
    "x - (t - x)",
    "x / (t + 1) / (x + 2)",
    "exp(sin(pi*x))*t",
    "cos(exp(-x^2))",
    "(1 - x)^3*x^2 + t^6",
    "sin(pi*x)^2*exp(-2*t)",
    "t^2*(x^2 - x)*exp(x)",
    "3*sin(2*pi*x) - 0.5*sin(5*pi*x)*t",
    "(t*x + 1)^2/(t + 1)",
    "-(x^2)^2 + pi*t",
    "exp(-t)*exp(t)*x",
]
