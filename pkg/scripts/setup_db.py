"""
Script untuk inisialisasi run registry
Jalankan ini sekali sebelum `lab run` kalau memakai PostgreSQL
"""

import sys
import os
import logging

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.config import LOG_LEVEL
from app.database import get_database_url, init_db, list_runs

logger = logging.getLogger("setup_db")


def setup_database():
    """Buat tabel registry dan tampilkan run terakhir"""
    logger.info(f"Setting up run registry at {get_database_url()}")
    init_db()

    runs = list_runs(limit=5)
    if not runs:
        logger.info("Registry is empty")
        return
    for run in runs:
        logger.info(f"  #{run.id} {run.name} [{run.status}] {run.config_hash[:12]} {run.report_path or '-'}")


if __name__ == "__main__":
    logging.basicConfig(level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    setup_database()
