# Synthetic Experiments Package
from .noise import NoiseSpec, apply_noise, noise_factors
from .measurements import transfer_trace, clean_boundary_data, generate_measurement
from .oracle import (ORACLE_CONVENTIONS, OracleSetup, OracleSample, OracleReport, oracle_topological_gradient,
                     predicted_gradient, sign_agreement, boundary_perturbation_order, loglog_slope)
from .campaign import CampaignConfig, CampaignRun, CampaignResult, run_campaign

__all__ = [
    'NoiseSpec', 'apply_noise', 'noise_factors',
    'transfer_trace', 'clean_boundary_data', 'generate_measurement',
    'ORACLE_CONVENTIONS', 'OracleSetup', 'OracleSample', 'OracleReport', 'oracle_topological_gradient',
    'predicted_gradient', 'sign_agreement', 'boundary_perturbation_order', 'loglog_slope',
    'CampaignConfig', 'CampaignRun', 'CampaignResult', 'run_campaign',
]
