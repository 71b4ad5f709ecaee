import logging
import os
import sys
from contextlib import contextmanager
from typing import Optional

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVEL_ENV = "MOTIONKIT_LOG"
LOG_FILE_ENV = "MOTIONKIT_LOG_FILE"
UNCAUGHT_EXIT_CODE = 4


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> int:
    """
    پیکربندی logger ریشه: خروجی stderr و در صورت درخواست فایل UTF-8

    سطح از آرگومان یا متغیر محیطی MOTIONKIT_LOG خوانده می‌شود (پیش‌فرض INFO).
    """
    requested = (level or os.environ.get(LOG_LEVEL_ENV) or "INFO").upper()
    resolved = logging.getLevelName(requested)
    unknown = not isinstance(resolved, int)
    if unknown:
        resolved = logging.INFO
    handlers = [logging.StreamHandler()]
    log_file = log_file or os.environ.get(LOG_FILE_ENV)
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=resolved, format=LOG_FORMAT, handlers=handlers, force=True)
    if unknown:
        logger.warning(f"Unknown log level {requested!r}, using INFO")
    return resolved


def global_exception_handler(exctype, value, traceback_obj):
    """
    ثبت خطاهای پیش‌بینی‌نشده پیش از خروج برنامه
    """
    error_msg = f"Unhandled exception: {exctype.__name__}: {value}"
    logger.error(error_msg, exc_info=(exctype, value, traceback_obj))
    print(f"InternalError: {value}", file=sys.stderr)


def install_exception_hook() -> None:
    sys.excepthook = global_exception_handler


@contextmanager
def safe_operation(operation_name: str):
    """
    اجرای یک عملیات جانبی؛ خطا ثبت می‌شود و اجرای برنامه ادامه پیدا می‌کند
    """
    try:
        yield
    except Exception as e:
        logger.error(f"Error in {operation_name}: {e}", exc_info=True)
