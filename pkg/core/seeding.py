import hashlib

import numpy as np


def derive_seed(seed: int, *labels) -> int:
    """
    استخراج seed هر مرحله از seed اصلی پیکربندی

    seed مرحله = ۸ بایت اول SHA-256 رشته "<seed>/<label>/..." (۶۳ بیت).
    برخلاف hash() پایتون، نتیجه بین اجراها ثابت است.
    """
    key = "/".join([str(int(seed))] + [str(label) for label in labels])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


def make_rng(seed: int, *labels) -> np.random.Generator:
    """
    ساخت مولد تصادفی numpy برای یک مرحله مشخص
    """
    if labels:
        seed = derive_seed(seed, *labels)
    return np.random.default_rng(seed)
