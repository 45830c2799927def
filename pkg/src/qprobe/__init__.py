"""Qubit-probe noise spectroscopy: filters, attenuation, Fisher bounds, adaptive Bayes."""

from .attenuation import AttenuationResult, attenuation_quadrature, closed_form, lorentzian_exact_J
from .bayes import AdaptiveConfig, init_prior, posterior_update, run_protocol
from .control import CPMG, CW, FID, ZENO, ControlSequence, filter_exact, harmonic_comb
from .fisher import bound_constants, maximize_qfi_numeric, qfi, relative_error, ultimate_bound
from .model import ProbeModel
from .spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum, PowerLawAttenuationModel

__version__ = "0.1.0"
