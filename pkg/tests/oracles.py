"""Reference values computed independently of the package (mpmath and nested scipy quadrature)."""

# int_x^inf sinc(u)^n du: mpmath, 25 digits, unit intervals out to x + 3000 plus the mean-power tail
SINC_TAIL = [
    (4, 0.3, 0.084078235244189654),
    (4, 2.5, 8.723990584399223e-5),
    (4, 17.25, 2.591913722673386e-7),
    (4, 300.0, 4.7527494978129064e-11),
    (6, 0.3, 0.04528931631381326),
    (6, 2.5, 7.7874628426167637e-7),
    (6, 17.25, 4.5416409599671244e-11),
    (6, 300.0, 2.6752816859473135e-17),
    (12, 0.3, 0.010329684184979788),
    (12, 2.5, 1.5887351867178841e-12),
    (12, 17.25, 6.3586700048208017e-22),
    (12, 300.0, 1.252457511410359e-35),
]

# p0 = P(|xi2 - X2| <= |xi1 - X1|) for the default bumps (k=3, sigma=1/2; k=4, sigma=1/4):
# nested 24-point Gauss-Legendre between consecutive zeros of the density, no closed-form tails
P0_NESTED_QUAD = [
    (3, (0.0, 0.0), 0.5000000000000001),
    (3, (3.0, 1.0), 0.9995769763940474),
    (3, (1.0, 3.0), 0.00042302360595255085),
    (3, (10.0, 9.0), 0.9505020937908483),
    (3, (40.0, 80.0), 7.376482697059679e-11),
    (3, (200.0, 30.0), 0.9999999999999465),
    (4, (0.0, 0.0), 0.5000000000000003),
    (4, (3.0, 1.0), 0.970395963184618),
    (4, (1.0, 3.0), 0.029604036815382026),
    (4, (10.0, 9.0), 0.8253208746659662),
    (4, (40.0, 80.0), 1.690465105840991e-12),
    (4, (200.0, 30.0), 0.9999999999999998),
]
