from aspmt import corpus_path
from aspmt.frontend import parse, parse_file, prepare
from aspmt.logic import BOT, constants, show
from aspmt.translator import intensional_keys, program_for_states, timed_signature, translate


def rules_text(p):
    return [str(r) for r in p.rules]


def test_acceleration_rule(car):
    p = translate(car, 1)
    assert "1:Speed = v + 3 * t <- 0:Accelerate & 0:Speed = v & 0:Dur = t." in rules_text(p)


def test_inertia_rule(car):
    assert "1:Speed = _v <- --(1:Speed = _v) & 0:Speed = _v." in rules_text(translate(car, 1))


def test_time_constraint_rule(car):
    assert "false <- ---(1:Time = t + t1) & (0:Time = t & 0:Dur = t1)." in rules_text(translate(car, 1))


def test_rules_per_step(car):
    # 2 static (speed limit, exogenous time) per state, 5 action dynamic and
    # 5 fluent dynamic per transition
    for m in range(4):
        p = translate(car, m)
        assert len(p.rules) == 2 * (m + 1) + 5 * m + 5 * m


def test_empty_horizon_with_only_dynamic_laws():
    d = prepare(parse(":- constants\n P :: simpleFluent(boolean); A :: action(boolean).\nA causes P.\ninertial P.\n"))
    p = translate(d, 0)
    assert p.rules == () and p.intensional == frozenset()
    assert set(p.signature) == {("P", (), 0)}


def test_intensional_list(car):
    keys = intensional_keys(car, 2)
    assert ("Speed", (), 0) not in keys and ("Speed", (), 2) in keys
    assert ("Accelerate", (), 1) in keys and ("Accelerate", (), 2) not in keys
    assert set(timed_signature(car, 2)) - keys == {("Speed", (), 0), ("Distance", (), 0), ("Time", (), 0)}


def test_sd_fluents_are_intensional_at_zero():
    d = prepare(parse(":- constants\n P :: simpleFluent(boolean); Q :: sdFluent(boolean).\ncaused Q if P.\ndefault ~Q.\ninertial P.\n"))
    assert intensional_keys(d, 1) == {("Q", (), 0), ("Q", (), 1), ("P", (), 1)}
    assert program_for_states(d).intensional == {("Q", (), 0)}


def test_states_program_keeps_speed_limit(car):
    p = program_for_states(car)
    assert "false <- ---(0:Speed <= 4)." in rules_text(p)


def test_watertank_state_bounds(watertank):
    p = program_for_states(watertank)
    (r,) = [r for r in p.rules if r.head == BOT]
    assert show(r.body) == "---(0 <= 0:Level & 0:Level <= 10)"


def test_spacecraft_signature(spacecraft):
    p = translate(spacecraft, 2)
    names = {k[0] for k in p.signature}
    assert "contr(Fire(J1),Vel(X))" in names
    # Vel, Pos per axis plus Time, over 3 states; Fire, Force, Dur and 6 contributions over 2 steps
    assert len(p.signature) == 3 * 7 + 2 * (2 + 6 + 1 + 6)


def test_dump_lists_intensional(car):
    text = translate(car, 1).dump()
    assert text.startswith("% horizon 1\n% intensional: 0:Accelerate 0:Decelerate 0:Dur 1:Distance 1:Speed 1:Time\n")


def test_every_rule_is_time_stamped():
    d = prepare(parse_file(corpus_path("watertank")))
    for r in translate(d, 2).rules:
        for f in (r.head, r.body):
            assert all(c.step is not None for c in constants(f))
