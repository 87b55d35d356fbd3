"""Channel degrading for finite discrete memoryless channels, the hard
channel W_M, and bounds on the degrading cost DC(q, L)."""

from .bounds import (BoundReport, ball_set_check, bound_report, convex_allocation_bound,
                     dc_lower_bound, dc_lower_stirling, dc_upper_bounds,
                     required_output_size, sphere_coeff)
from .channel import (Channel, JointView, ValidationReport, apply_partition, joint_view,
                      mutual_information, validate)
from .errors import ChannelError, ResourceLimitError
from .hard import (HardChannelSpec, build_hard_channel, hard_channel_mi,
                   posterior_of_label, symmetry_orbits)
from .partition import Partition
from .polar import PolarNode, construct, polar_minus, polar_plus, rate_loss_demo
from .quantizer import (DegradeResult, degrade, degrade_binary_dp, degrade_exhaustive,
                        degrade_greedy, delta, delta_tilde, entropy, holder_defect_check)

__version__ = "0.1.0"
