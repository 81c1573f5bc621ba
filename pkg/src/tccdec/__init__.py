"""Decoders for trellis-constrained codes C1 ∩ C2."""

from .amp import DecodeResult, DecoderConfig, DecoderState, decode
from .bp import BpConfig, bp_decode
from .channels import ChannelModel, lam, llr, parse_channel, transmit
from .codefile import load_code, parse_code
from .marginals import MarginalTable, XiSplit, forward_backward, log_xi_total, xi_split
from .trellis import (
    IntersectionCode,
    Trellis,
    build_check_trellis,
    build_conv_trellis,
    contains,
    enumerate_codewords,
)

__version__ = "0.1.0"
