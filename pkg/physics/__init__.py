"""
Physics modules: scattering kernel, response function quadrature and closed
forms, corrugation profiles and condensate frequency shifts.
"""
