"""
نمودارهای ویژگی‌ها و خلاصه نتایج (matplotlib بدون نمایشگر)
"""

import logging
import os
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from core.evaluation import EvaluationReport  # noqa: E402
from core.features import FEATURE_NAMES, FeatureTable  # noqa: E402
from core.representation import ClusterModel  # noqa: E402

logger = logging.getLogger(__name__)


def plot_feature_traces(
    table: FeatureTable,
    path: Union[str, os.PathLike],
    cluster_model: Optional[ClusterModel] = None,
    frame_rate: float = 30.0,
) -> Path:
    """
    زاویه‌ها (درجه)، ارتفاع مرکز جرم و موقعیت ML تنه در طول زمان

    اگر مدل خوشه‌بندی داده شود، بازه هر خوشه با رنگ پس‌زمینه مشخص می‌شود.
    """
    path = Path(path)
    t = table.frame_indices / frame_rate
    values = table.values
    fig, (ax_angles, ax_com, ax_ml) = plt.subplots(3, 1, figsize=(10, 9), sharex=True)

    ax_angles.plot(t, np.degrees(values[:, 1]), label="Euler spine-neck")
    ax_angles.plot(t, np.degrees(values[:, 2]), label="Body lean (AP)")
    ax_angles.set_ylabel("degrees")
    ax_angles.legend(loc="upper right")

    ax_com.plot(t, values[:, 4], color="tab:green")
    ax_com.set_ylabel("CoM height (m)")

    for column in range(6, len(FEATURE_NAMES), 2):
        ax_ml.plot(t, values[:, column], label=FEATURE_NAMES[column][:-2])
    ax_ml.set_ylabel("torso ML x (m)")
    ax_ml.set_xlabel("time (s)")
    ax_ml.legend(loc="upper right", fontsize="small")

    if cluster_model is not None:
        colors = plt.cm.tab10(np.linspace(0, 1, 10))
        lookup = cluster_model.assignment_map()
        for rank, cluster in enumerate(cluster_model.cluster_order):
            member_times = [index / frame_rate for index in table.frame_indices if lookup.get(int(index)) == cluster]
            if not member_times:
                continue
            for ax in (ax_angles, ax_com, ax_ml):
                ax.axvspan(min(member_times), max(member_times), color=colors[rank % 10], alpha=0.12)

    fig.suptitle(f"{table.subject_id} - {table.movement.title} ({table.group.title})")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    logger.info(f"Saved feature traces to {path}")
    return path


def plot_report_summary(reports: Sequence[EvaluationReport], path: Union[str, os.PathLike]) -> Path:
    """
    نمودار میله‌ای F1 و MCC هر طبقه‌بند برای هر حرکت
    """
    path = Path(path)
    movements = list(dict.fromkeys(r.movement for r in reports))
    classifiers = list(dict.fromkeys(r.classifier for r in reports))
    lookup = {(r.movement, r.classifier): r.metrics for r in reports}
    width = 0.8 / max(len(classifiers), 1)
    x = np.arange(len(movements))

    fig, axes = plt.subplots(1, 2, figsize=(14, 5), sharey=False)
    for ax, metric, bottom in ((axes[0], "f1", 0.0), (axes[1], "mcc", -1.0)):
        for n, classifier in enumerate(classifiers):
            heights = [getattr(lookup[(m, classifier)], metric) if (m, classifier) in lookup else 0.0
                       for m in movements]
            ax.bar(x + n * width, heights, width, label=classifier.title)
        ax.set_xticks(x + width * (len(classifiers) - 1) / 2)
        ax.set_xticklabels([m.title for m in movements], rotation=20, ha="right")
        ax.set_ylim(bottom, 1.0)
        ax.set_title("F1-score" if metric == "f1" else "MCC")
    axes[0].legend(loc="lower right")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path
