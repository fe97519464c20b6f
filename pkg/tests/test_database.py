from app.database import ExperimentRun, finish_run, init_db, list_runs, register_run, session_scope


def test_register_and_finish(registry):
    run_id = register_run("demo", "a" * 64, seed=2**63 + 5, repetitions=2)
    finish_run(run_id, [
        {"index": 0, "seed": 2**64 - 1, "status": "ok", "error": None},
        {"index": 1, "seed": 17, "status": "failed", "error": "InvalidArgumentError: boom"},
    ], status="partial", report_path="out/report.json")

    with session_scope() as session:
        run = session.get(ExperimentRun, run_id)
        assert run.status == "partial"
        assert run.seed == str(2**63 + 5)
        assert run.finished_at is not None
        records = sorted(run.repetition_records, key=lambda r: r.index)
        assert [r.status for r in records] == ["ok", "failed"]
        assert records[0].seed == str(2**64 - 1)
        assert records[1].error.startswith("InvalidArgumentError")


def test_list_runs_newest_first(registry):
    first = register_run("a", "0" * 64, seed=0, repetitions=1)
    second = register_run("b", "1" * 64, seed=1, repetitions=1)
    runs = list_runs()
    assert [run.id for run in runs] == [second, first]
    assert runs[0].status == "running"
    assert len(list_runs(limit=1)) == 1


def test_init_db_creates_file(registry):
    init_db()
    assert registry.is_file()
