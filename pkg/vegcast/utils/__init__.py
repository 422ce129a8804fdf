from .storage_location import get_storage_location
from .file_utils import load_json, load_text, save_json, save_text, save_frame
from .date_parser import parse_date
from .seeding import sub_seed, rng_for
from .log_events import format_event, log_event
from .stopwatch import Stopwatch
