from .generator import (SyntheticSpec, SyntheticBundle, Coupling, DroughtEvent, generate_synthetic, expected_coverage,
                        TRUTH_FILE, CLEAR_COUNTS_FILE, SIDECAR_FILE, OBSERVATIONS_DIR)
