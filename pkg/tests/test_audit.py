import json
import math
import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from tfiv.audit import (
    INDETERMINATE,
    INSIGNIFICANT,
    SIGNIFICANT,
    SpecRecord,
    classify_corpus,
    classify_record,
    read_corpus_csv,
    report_to_json,
)
from tfiv.errors import DomainError
from tfiv.size_engine import (
    ConventionalT,
    HybridAR,
    PureAR,
    TFProcedure,
    ThresholdTF,
)

Q95 = 3.8414588206941254
FIXTURE = Path(__file__).parent / "fixtures" / "audit_sample.csv"


def procedures_for(cvf):
    return {
        "conventional": ConventionalT(crit=Q95),
        "threshold-2b": ThresholdTF(crit=Q95, f_threshold=104.7),
        "threshold-2c": ThresholdTF(crit=3.43 * 3.43, f_threshold=10.0),
        "tf": TFProcedure(cvf=cvf),
    }


def test_fixture_weights_and_tables(cvf):
    records = read_corpus_csv(FIXTURE)
    assert [r.spec_id for r in records] == ["s1", "s2", "s3"]
    # derived F wins over reported when both are present
    assert [r.F for r in records] == [120.0, 30.0, 8.0]

    report = classify_corpus(records, procedures_for(cvf))
    assert report.n_records == 3 and report.n_universe == 3
    # conventional-solid cell: s1 and s2; paper p1 splits its unit weight
    assert report.baseline_cell_count == 2
    assert math.isclose(report.baseline_cell_weight, 0.5, rel_tol=1e-12)

    conv = report.procedures["conventional"]
    assert conv.counts == {
        "sig_F_above": 2,
        "sig_F_below": 0,
        "insig_F_above": 0,
        "insig_F_below": 1,
        INDETERMINATE: 0,
    }
    assert conv.reclassified_count == 0

    t2b = report.procedures["threshold-2b"]
    assert t2b.counts["sig_F_above"] == 1  # only s1 clears F > 104.7
    assert t2b.counts["insig_F_above"] == 1
    assert t2b.reclassified_count == 1
    assert t2b.reclassified_rate == 0.5
    assert math.isclose(t2b.reclassified_weighted_rate, 0.5, rel_tol=1e-12)

    # |t| = 2.5 never clears sqrt(11.76) = 3.43
    assert report.procedures["threshold-2c"].reclassified_count == 2

    # the F-adaptive rule rescues s2: c(30) ~ 5.53 < 6.25 = t^2
    tf = report.procedures["tf"]
    assert tf.counts["sig_F_above"] == 2
    assert tf.reclassified_count == 0


def test_prefer_reported_column(cvf):
    records = read_corpus_csv(FIXTURE, prefer_reported=True)
    # s2 switches to its reported F = 110; s1 and s3 fall back across columns
    assert [r.F for r in records] == [120.0, 110.0, 8.0]
    report = classify_corpus(records, procedures_for(cvf))
    assert report.procedures["threshold-2b"].reclassified_count == 0


def test_classify_record_rules(cvf):
    rec = SpecRecord(spec_id="a", paper_id="p", t=2.5, F=30.0)
    assert classify_record(rec, ConventionalT(crit=Q95)) == SIGNIFICANT
    assert (
        classify_record(rec, ThresholdTF(crit=Q95, f_threshold=104.7))
        == INSIGNIFICANT
    )
    # hybrid reads t above its gate, but needs the unpublished AR stat below
    assert (
        classify_record(rec, HybridAR(crit=Q95, f_threshold=10.0)) == SIGNIFICANT
    )
    low = SpecRecord(spec_id="b", paper_id="p", t=2.5, F=8.0)
    assert (
        classify_record(low, HybridAR(crit=Q95, f_threshold=10.0)) == INDETERMINATE
    )
    assert classify_record(rec, PureAR(crit=Q95)) == INDETERMINATE
    # below the support edge the adaptive rule cannot reject at any t
    tiny = SpecRecord(spec_id="c", paper_id="p", t=9.0, F=2.0)
    assert classify_record(tiny, TFProcedure(cvf=cvf)) == INSIGNIFICANT
    missing = SpecRecord(spec_id="d", paper_id="p", t=None, F=30.0)
    assert classify_record(missing, ConventionalT(crit=Q95)) == INDETERMINATE


@given(st.floats(-6.0, 6.0), st.floats(0.0, 300.0))
@settings(max_examples=200, deadline=None)
def test_adaptive_rule_is_nested_in_conventional(cvf, t, F):
    rec = SpecRecord(spec_id="x", paper_id="p", t=t, F=F)
    tf_verdict = classify_record(rec, TFProcedure(cvf=cvf))
    t2b_verdict = classify_record(rec, ThresholdTF(crit=Q95, f_threshold=104.7))
    conv_verdict = classify_record(rec, ConventionalT(crit=Q95))
    # c(F) >= q everywhere, so an adaptive rejection implies a conventional one
    if tf_verdict == SIGNIFICANT:
        assert conv_verdict == SIGNIFICANT
    if t2b_verdict == SIGNIFICANT:
        assert conv_verdict == SIGNIFICANT
        assert F > 104.7


def test_report_is_permutation_invariant(cvf):
    records = read_corpus_csv(FIXTURE)
    base = report_to_json(classify_corpus(records, procedures_for(cvf)))
    rng = random.Random(0)
    for _ in range(5):
        shuffled = records[:]
        rng.shuffle(shuffled)
        assert report_to_json(classify_corpus(shuffled, procedures_for(cvf))) == base


def test_weighted_shares_partition_unity(cvf):
    records = read_corpus_csv(FIXTURE)
    report = classify_corpus(records, procedures_for(cvf))
    for cells in report.procedures.values():
        assert math.isclose(
            math.fsum(cells.weighted_shares.values()), 1.0, rel_tol=1e-12
        )


def test_records_missing_stats_leave_the_universe(cvf):
    records = [
        SpecRecord(spec_id="a", paper_id="p", t=2.5, F=120.0),
        SpecRecord(spec_id="b", paper_id="p", t=2.5, F=None),
        SpecRecord(spec_id="c", paper_id="q", t=None, F=30.0),
    ]
    report = classify_corpus(records, {"conventional": ConventionalT(crit=Q95)})
    assert report.n_records == 3
    assert report.n_universe == 1


def test_corpus_csv_errors(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("id,t,F\nx,2,30\n")
    with pytest.raises(DomainError):
        read_corpus_csv(bad_header)

    short_row = tmp_path / "s.csv"
    short_row.write_text("spec_id,paper_id,t,F_derived,F_reported,weight\na,p,2.5\n")
    with pytest.raises(DomainError):
        read_corpus_csv(short_row)

    not_number = tmp_path / "n.csv"
    not_number.write_text(
        "spec_id,paper_id,t,F_derived,F_reported,weight\na,p,abc,30,,\n"
    )
    with pytest.raises(DomainError):
        read_corpus_csv(not_number)

    header_only = tmp_path / "e.csv"
    header_only.write_text("spec_id,paper_id,t,F_derived,F_reported,weight\n")
    with pytest.raises(DomainError):
        read_corpus_csv(header_only)


def test_record_validation():
    with pytest.raises(DomainError):
        SpecRecord(spec_id="", paper_id="p", t=1.0, F=2.0)
    with pytest.raises(DomainError):
        SpecRecord(spec_id="a", paper_id="p", t=1.0, F=-2.0)
    with pytest.raises(DomainError):
        SpecRecord(spec_id="a", paper_id="p", t=1.0, F=2.0, weight=0.0)
    with pytest.raises(DomainError):
        SpecRecord(spec_id="a", paper_id="p", t=math.inf, F=2.0)


def test_corpus_validation(cvf):
    with pytest.raises(DomainError):
        classify_corpus([], procedures_for(cvf))
    only_partial = [SpecRecord(spec_id="a", paper_id="p", t=None, F=30.0)]
    with pytest.raises(DomainError):
        classify_corpus(only_partial, procedures_for(cvf))
    with pytest.raises(DomainError):
        classify_corpus(
            [SpecRecord(spec_id="a", paper_id="p", t=2.0, F=30.0)], {}
        )


def test_json_layout(cvf):
    records = read_corpus_csv(FIXTURE)
    report = classify_corpus(records, procedures_for(cvf))
    text = report_to_json(report)
    assert text.endswith("\n")
    doc = json.loads(text)
    assert doc["baseline_cell"] == {"count": 2, "weighted_share": 0.5}
    assert set(doc["procedures"]) == set(procedures_for(cvf))
    recl = doc["procedures"]["threshold-2b"]["reclassified"]
    assert recl == {"count": 1, "rate": 0.5, "weighted_rate": 0.5}
    # serialization is the stable face of the report: keys sorted, 6dp shares
    assert text == report_to_json(report)


def test_marginally_significant_cell_prefers_adaptive_rule(cvf):
    # A corpus shaped like the usual published cloud: moderately strong
    # instruments with t just past 1.96.  Both fixed-threshold repairs wipe
    # out more of the conventional-solid cell than the F-adaptive rule does.
    records = []
    k = 0
    for t in (2.0, 2.2, 2.5, 2.8, 3.2, 3.6, 4.0):
        for F in (12.0, 20.0, 30.0, 50.0, 80.0, 120.0):
            k += 1
            records.append(
                SpecRecord(spec_id=f"r{k}", paper_id=f"p{k}", t=t, F=F)
            )
    report = classify_corpus(records, procedures_for(cvf))
    tf_n = report.procedures["tf"].reclassified_count
    assert tf_n < report.procedures["threshold-2b"].reclassified_count
    assert tf_n < report.procedures["threshold-2c"].reclassified_count
