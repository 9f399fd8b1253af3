"""FBMC/OQAM baseband simulator with pilot-based and neural channel estimators.

Subpackages and modules:

- ``params``      system parameters (transmission modes, QAM maps)
- ``protofilter`` Nyquist prototype filter design
- ``filterbank``  polyphase synthesis/analysis banks and direct-form oracle
- ``oqam``        offset-QAM pre/post processing
- ``framing``     frequency-frame construction, PRBS pilots
- ``channel``     multipath and AWGN channel models
- ``estimation``  linear / cubic-spline / neural channel estimators
- ``harness``     Monte-Carlo BER engine
- ``cli``         command-line front end
"""

__version__ = "0.1.0"
