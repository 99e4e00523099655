"""
Plain-text rendering of pipeline results for stdout
"""
from typing import List, Sequence, Tuple

from readability_wmd.domain_types import CorrectionReport, EvalReport, UTestResult

METHOD_LABELS = {
    "base": "Base classifier",
    "vote-only": "w/ 3-neighbor vote",
    "wmd": "w/ vote + WMD tie-break",
}


class ReportFormatter:
    """Format evaluation and correction results as aligned text"""

    @staticmethod
    def format_eval_table(report: EvalReport) -> str:
        """
        Method x {Acc, F1} table over the fold means

        Args:
            report (EvalReport): Cross-validation report

        Returns:
            str: Aligned table followed by the tie-break rate
        """
        rows = [(METHOD_LABELS.get(m, m), s.accuracy, s.macro_f1) for m, s in report.aggregate.items()]
        width = max(len("Method"), *(len(label) for label, _, _ in rows))
        lines = [f"{'Method':<{width}}  {'Acc':>6}  {'F1':>6}", f"{'-' * width}  {'-' * 6}  {'-' * 6}"]
        for label, acc, f1 in rows:
            lines.append(f"{label:<{width}}  {acc:>6.3f}  {f1:>6.3f}")
        lines.append("")
        lines.append(f"{report.k}-fold CV, seed {report.seed}, tie-break rate {report.tie_rate:.1%}")
        return "\n".join(lines)

    @staticmethod
    def format_distance(distance: float) -> str:
        return f"{distance:.9f}"

    @staticmethod
    def format_plan(flows: Sequence[Tuple[str, str, float]]) -> str:
        """One `source -> destination mass` line per flow"""
        return "\n".join(f"{src} -> {dst} {mass:.9f}" for src, dst, mass in flows)

    @staticmethod
    def format_utest(result: UTestResult) -> str:
        return (
            f"U = {result.u_statistic:g}  z = {result.z_statistic:.4f}  "
            f"p = {result.p_value_two_sided:.4g}  "
            f"means {result.mean_a:.6f} / {result.mean_b:.6f}  (n = {result.n1}, {result.n2})"
        )

    @staticmethod
    def format_corrections(reports: List[CorrectionReport]) -> str:
        """
        One summary line per assessed document

        Failed documents show their error in place of the labels.
        """
        lines = []
        for row in reports:
            if row.error:
                lines.append(f"{row.id}: error: {row.error}")
                continue
            tie = " (tie-break)" if row.tie_broken else ""
            lines.append(f"{row.id}: {row.base_prediction} -> {row.corrected_label}{tie}")
        return "\n".join(lines)
