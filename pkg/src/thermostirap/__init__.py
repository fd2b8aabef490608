"""Population transfer between qubits through a thermal intermediary.

Two treatments of the same physics: an exact density-matrix evolution of
a small discrete model (``discrete``/``liouville``), and a
thermofield + chain-mapped MPS evolution of the continuum model
(``bath``/``mps``/``tcmps``).
"""

__version__ = "0.1.0"
