class MotionKitError(Exception):
    """
    استثنای پایه برای تمام خطاهای motionkit
    """
    exit_code = 1
    category = "MotionKitError"


class ConfigError(MotionKitError):
    """
    خطای پیکربندی (فایل تنظیمات یا آرگومان‌های نادرست)
    """
    exit_code = 1
    category = "ConfigError"


class DataError(MotionKitError):
    """
    خطای داده‌های ورودی (ضبط‌ها، فریم‌ها، خوشه‌ها)
    """
    exit_code = 2
    category = "DataError"


class TrainError(MotionKitError):
    """
    خطای آموزش یا پیش‌بینی مدل
    """
    exit_code = 3
    category = "TrainError"


class EmptyRecording(DataError):
    """
    ضبط بدون هیچ فریم معتبر
    """
    pass


class InvalidRecording(DataError):
    """
    ساختار فایل ضبط یا فراداده‌های آن نامعتبر است
    """
    pass


class ZeroVector(DataError):
    """
    بردار با طول صفر در محاسبه زاویه
    """
    pass


class TooFewFrames(DataError):
    """
    تعداد فریم‌ها از k کمتر است
    """
    pass


class EmptyCluster(DataError):
    """
    خوشه‌ای بدون عضو باقی‌مانده
    """
    pass


class TooFewSamples(DataError):
    """
    نمونه یا گروه کافی برای تقسیم k-fold وجود ندارد
    """
    pass


class SingleClass(TrainError):
    """
    داده‌های آموزشی فقط یک کلاس دارند
    """
    pass


class DimensionMismatch(TrainError):
    """
    ابعاد ورودی با ابعاد مدل یکسان نیست
    """
    pass


class NonFiniteLoss(TrainError):
    """
    واگرایی شبکه عصبی (مقدار loss نامتناهی)
    """
    pass


class FoldLeakage(TrainError):
    """
    بردارهای یک ضبط هم در آموزش و هم در آزمون یک fold دیده شدند
    """
    pass


class EmptyMatrix(TrainError):
    """
    ماتریس درهم‌ریختگی بدون هیچ نمونه
    """
    pass
