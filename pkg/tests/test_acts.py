import pytest

from kgchat.acts import DialogueAct, INVALID_OTHER, LEAF_COUNT, TAXONOMY, all_leaves


def test_taxonomy_has_37_leaves():
    assert LEAF_COUNT == 37
    assert len(all_leaves()) == 37


def test_act_group_has_no_leaves():
    assert TAXONOMY["Act"] == ()
    act = DialogueAct("Act")
    assert act.label == "da.Act"


def test_label_parse_round_trip():
    for leaf in all_leaves():
        assert DialogueAct.parse(leaf.label) == leaf


@pytest.mark.parametrize("label", ["da.Que.Nope", "da.Bogus.X", "Que.Yesno", "da", "da.Que.Yesno.Extra"])
def test_invalid_labels_rejected(label):
    with pytest.raises(ValueError):
        DialogueAct.parse(label)


def test_leafless_tier2_rejected():
    # every group except Act requires a leaf
    with pytest.raises(ValueError):
        DialogueAct("Que")


def test_prefix_matching_is_tier_aware():
    yesno = DialogueAct("Que", "Yesno")
    assert yesno.matches_prefix("da")
    assert yesno.matches_prefix("da.Que")
    assert yesno.matches_prefix("da.Que.Yesno")
    assert not yesno.matches_prefix("da.Que.Yes")  # not a tier boundary
    assert not yesno.matches_prefix("da.Ans")
    # "Wh" is its own leaf, not a prefix of WhOb
    assert not DialogueAct("Que", "WhOb").matches_prefix("da.Que.Wh")


def test_invalid_other_constant():
    assert INVALID_OTHER.label == "da.Inv.Other"
