# Nominal compound patterns over Universal POS tags. These approximate
# common MWE shapes; they are not a curated inventory.
adj_noun: ADJ NOUN
noun_noun: NOUN NOUN
noun_adp_noun: NOUN ADP NOUN
propn_propn: PROPN PROPN
adj_adj_noun: ADJ ADJ NOUN
