"""
Casimir forces and potentials for ensembles of dielectric spheres in a
dielectric background, from the simply-connected multiple-scattering expansion.
"""
