"""Multi-cell massive-MIMO link-level simulator with UAV pilot
decontamination."""

from .channel import (ArrayGeometry, LinkType, PathLossParams, gen_gue_channel,
                      gen_uav_channel, path_loss, steering_vector,
                      uca_halfwavelength)
from .detector import (AngularGrid, DetectionOutcome, LoSComponent,
                       matched_filter_spectrum, successive_detection,
                       successive_detection_batch)
from .harness import (ScenarioConfig, empirical_cdf, link_budget_normalize,
                      load_config, run_trials, default_preset)
from .linklevel import (AsymptoticBetas, Direction, PowerBudget, Scheme,
                        SinrSample, asymptotic_sinr, downlink_sinr_gue,
                        downlink_sinr_uav, table1_high_snr, uplink_sinr)
from .pdc import (DetectorConfig, MatchTolerance, decontaminate_gue,
                  decontaminate_uav, match_components, perfect_pdc)
from .topology import (NetworkLayout, UserKind, build_layout, geometry_to_aoa,
                       place_users)
from .training import PilotConfig, ls_estimate

__version__ = "0.1.0"
