from .climatology import Climatology, build_climatology, write_climatology, read_climatology, WEEKS
from .vci import (compute_vci, compute_vci3m, compute_ndvi_anomaly, vci_values, vci3m_values, VCIValues,
                  VCI3M_WEEKS, DEGENERATE_POLICIES)
