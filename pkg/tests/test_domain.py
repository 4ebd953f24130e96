import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itervote.domain import (
    DomainError,
    IssueDomain,
    IssueOrder,
    PreferenceProfile,
    Ranking,
    adjusted_score,
    alternative_index,
    induced_local_preference,
    is_O_legal,
    is_separable,
    issue_winner,
    outcome_with_vote,
    plurality_outcome,
    score,
)
from itervote.experiments import o_legal_ranking

B2 = IssueDomain.binary(2)


def ranking(domain, *alts):
    return Ranking.from_alternatives(domain, alts)


R1 = ranking(B2, (1, 0), (0, 0), (0, 1), (1, 1))
R2 = ranking(B2, (1, 1), (0, 0), (0, 1), (1, 0))
R3 = ranking(B2, (0, 0), (0, 1), (1, 0), (1, 1))


@st.composite
def domains(draw, max_p=3, max_size=3):
    sizes = draw(st.lists(st.integers(2, max_size), min_size=1, max_size=max_p))
    return IssueDomain(tuple(sizes))


@st.composite
def domain_and_votes(draw):
    domain = draw(domains())
    n = draw(st.integers(1, 8))
    votes = tuple(tuple(draw(st.integers(0, s - 1)) for s in domain.sizes) for _ in range(n))
    return domain, votes


@st.composite
def domain_and_ranking(draw, max_p=3, max_size=3):
    domain = draw(domains(max_p, max_size))
    order = draw(st.permutations(range(domain.size)))
    return domain, Ranking(domain, tuple(order))


class TestIssueDomain:
    def test_rejects_single_candidate_issue(self):
        with pytest.raises(DomainError):
            IssueDomain((2, 1))

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            IssueDomain(())

    def test_index_is_mixed_radix_with_first_issue_most_significant(self):
        d = IssueDomain((2, 3))
        assert [d.index(a) for a in [(0, 0), (0, 2), (1, 0), (1, 2)]] == [0, 2, 3, 5]
        assert alternative_index((1, 1), d) == 4

    def test_check_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            B2.check((0, 2))
        with pytest.raises(DomainError):
            B2.check((0,))

    @given(domains(max_p=4, max_size=4))
    def test_index_round_trip(self, d):
        for idx in range(d.size):
            assert d.index(d.alternative(idx)) == idx
        assert [d.index(a) for a in d.alternatives()] == list(range(d.size))


class TestRanking:
    def test_rejects_non_permutation(self):
        with pytest.raises(DomainError):
            Ranking(B2, (0, 1, 1, 2))

    def test_prefers_and_top(self):
        assert R1.top == (1, 0)
        assert R1.prefers((0, 0), (1, 1))
        assert not R1.prefers((1, 1), (0, 0))


class TestPlurality:
    def test_example_scores_and_outcome(self):
        votes = ((1, 0), (1, 1), (0, 0))
        s = score(votes, B2)
        assert s == ((1, 2), (2, 1))
        assert plurality_outcome(s) == (1, 0)

    def test_ties_go_to_smallest_index(self):
        assert issue_winner((3, 3)) == 0
        assert issue_winner((1, 4, 4)) == 1
        assert issue_winner((0, 0, 0, 0)) == 0

    def test_adjusted_score_of_example_agent(self):
        votes = ((1, 0), (1, 1), (0, 0))
        s = adjusted_score(votes, 1, B2)
        assert s == ((1, 1), (2, 0))
        assert outcome_with_vote(s, (0, 1)) == (0, 0)

    def test_adjusted_score_rejects_bad_agent(self):
        with pytest.raises(DomainError):
            adjusted_score(((0, 0),), 3, B2)

    @given(domain_and_votes())
    def test_score_sums_to_n(self, dv):
        domain, votes = dv
        for vec in score(votes, domain):
            assert sum(vec) == len(votes)

    @given(domain_and_votes())
    def test_removing_then_adding_own_vote_restores_outcome(self, dv):
        domain, votes = dv
        for j in range(len(votes)):
            assert outcome_with_vote(adjusted_score(votes, j, domain), votes[j]) == plurality_outcome(score(votes, domain))


class TestStructure:
    def test_example_rankings(self):
        assert is_O_legal(R1, IssueOrder((1, 0)))
        assert not is_O_legal(R1, IssueOrder((0, 1)))
        assert is_separable(R3)
        assert not is_separable(R2)
        assert not is_O_legal(R2, IssueOrder((0, 1))) and not is_O_legal(R2, IssueOrder((1, 0)))

    def test_induced_local_preference_ignores_own_issue(self):
        assert induced_local_preference(R1, 0, (0, 0)) == induced_local_preference(R1, 0, (1, 0)) == (1, 0)
        assert induced_local_preference(R1, 0, (0, 1)) == (0, 1)

    def test_issue_order_validation(self):
        with pytest.raises(DomainError):
            IssueOrder((0, 0))
        with pytest.raises(DomainError):
            is_O_legal(R1, IssueOrder((0, 1, 2)))

    @settings(max_examples=60)
    @given(domain_and_ranking(max_p=3, max_size=2))
    def test_separable_iff_legal_for_every_order(self, dr):
        domain, r = dr
        every = all(is_O_legal(r, IssueOrder(o)) for o in itertools.permutations(range(domain.p)))
        assert is_separable(r) == every

    @settings(max_examples=40)
    @given(st.data())
    def test_conditional_tables_give_legal_rankings(self, data):
        domain = data.draw(domains(max_p=3, max_size=3))
        order = IssueOrder(tuple(data.draw(st.permutations(range(domain.p)))))
        tables = {}
        for pos, issue in enumerate(order.order):
            for ctx in itertools.product(*(range(domain.sizes[k]) for k in order.order[:pos])):
                tables[(issue, ctx)] = tuple(data.draw(st.permutations(range(domain.sizes[issue]))))
        assert is_O_legal(o_legal_ranking(domain, order, tables), order)

    def test_profile_requires_shared_domain(self):
        with pytest.raises(DomainError):
            PreferenceProfile(B2, (R1, Ranking(IssueDomain((3,)), (0, 1, 2))))
