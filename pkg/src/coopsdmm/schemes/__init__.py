"""SDMM and PIR protocol engine."""

from .codes import CoopGroupPlan, GaspCode, MatDotCode, ScriptedRandomness, code_for, derive_seed, select_points
from .config import (GASP_COOP, GASP_ENC, GASP_PLAIN, MATDOT_COOP, MATDOT_ENC, MATDOT_PLAIN, MODES,
                     PirConfig, SdmmConfig)
from .pir import (PirStore, pir_probe_target, pir_rate, pir_retrieve, pir_setup, pir_storage_plan,
                  reconstruct_storage, selector)
from .protocols import (RunResult, SdmmProtocol, ShareBundle, ThresholdCounterexample, enc_coop_wrap,
                        gasp_coop_run, gasp_enc_run, gasp_encode_2x2, gasp_plain_run, matdot_coop_run,
                        matdot_enc_run, matdot_encode, matdot_probe_target, matdot_threshold_counterexample,
                        sdmm_run)
