"""Round-trip corpus shared by the parser tests and the acceptance suite."""

ROUNDTRIP_CORPUS = (
    "laplacian(ball(dim=3,t=0.5,avg))",
    "x^2 * exp(-x^2)",
    "lincomb(0.5*sphere(dim=1,t=0.3,avg))",
    "dirac(0)",
    "dirac(0.5, -1, 2)",
    "dirac_d(0, 2)",
    "dirac_d((0, 1), (1, 1))",
    "interval(-1, 2.5)",
    "sphere(dim=2, t=1.5)",
    "ball(dim=1, t=0.7)",
    "push_p(lincomb(0.5*sphere(dim=3,t=1,avg) - 2*ball(dim=3,t=0.25)))",
    "mul(1 + x*y, sphere(dim=2, t=0.5, avg))",
    "lie([1, -y], ball(dim=2, t=1, avg))",
    "conv(dirac(0.25) - dirac(-0.25), sphere(dim=1, t=1, avg))",
    "heat(t=0.25)",
    "poisson(t=1)",
    "1/2*laplacian(dirac(0)) + 3*dirac(1)",
    "sin(x)*cos(2*y) - z^3/3",
    "bump((x^2 + y^2)/4)",
    "x*y, x + y^2, -z",
)
