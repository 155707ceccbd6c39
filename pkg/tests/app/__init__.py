import os

SINGLE_CROSSING = """[model]
name = "linear-isotropic"
dimension = 2

[initial]
mode = "minus"
t0 = 0.0
z0 = [-1.0, 0.0, 2.0, 0.0]
points = 64
extent = 10.0

[run]
kind = "crossing-single"
t_end = 1.0
epsilons = [0.02, 0.01, 0.005]

[grid]
profile_dt = 5e-4
"""

CLASSICAL_ONLY = """[model]
name = "linear-isotropic"

[initial]
mode = "minus"
z0 = [-1.0, 0.0, 2.0, 0.0]

[run]
kind = "classical-only"
t_end = 1.5
"""


def write_config(folder, content, name="experiment.ini"):
    path = os.path.join(folder, name)
    with open(path, "w") as fd:
        fd.write(content)
    return path

LZ_TABLE = """[run]
kind = "lz-table"
eta2_grid = (-1.0, 1.0, 0.5)
oracle_eta2 = [1.0]
oracle_s0 = 20.0
"""

ADIABATIC_PLUS = """[model]
name = "linear-isotropic"

[initial]
mode = "plus"
z0 = [1.0, 0.0, 1.0, 0.0]
points = 32
extent = 8.0

[run]
kind = "adiabatic"
t_end = 0.2
epsilons = [0.1, 0.05, 0.025]

[grid]
extent = 4.0
points = 128
profile_dt = 5e-4
"""

COARSE_CROSSING = """[model]
name = "linear-isotropic"

[initial]
mode = "minus"
z0 = [-1.0, 0.0, 2.0, 0.0]
points = 64
extent = 10.0

[run]
kind = "crossing-single"
t_end = 0.9
epsilons = [0.1, 0.05]
times = [0.0, 0.3, 0.9]

[grid]
extent = 3.0
profile_dt = 5e-4
"""

COARSE_PAIR = COARSE_CROSSING.replace('"crossing-single"', '"crossing-pair"') + """
[initial.plus]
mode = "plus"
z0 = [-0.656854249492381, 0.0, 0.8284271247461903, 0.0]
points = 64
extent = 10.0

[tolerances]
tol_meet = 1e-5
"""
