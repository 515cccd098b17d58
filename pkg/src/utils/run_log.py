import os
import logging
from datetime import datetime

# Configure logging
log_directory = os.getenv("LOG_DIR", "logs")
os.makedirs(log_directory, exist_ok=True)  # Ensure log directory exists
log_file = os.path.join(
    log_directory, f"rearrangement_{datetime.now().strftime('%Y%m%d')}.log"
)

# Set up logger for sorting runs, oracle searches and bench batches
logger = logging.getLogger("rearrangement_logger")
if not logger.handlers:  # Check if handlers are already added
    logger.setLevel(logging.INFO)
    logger.propagate = False  # Prevent propagation to root logger to avoid duplicate logs

    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setFormatter(
        logging.Formatter("%(asctime)s - %(levelname)s - STEP:%(step)s - %(message)s")
    )
    logger.addHandler(file_handler)


def log_step(step: str, message: str, *args, level: int = logging.INFO) -> None:
    """Log through ``rearrangement_logger`` tagging the record with a step id or stage name."""
    logger.log(level, message, *args, extra={"step": step})
