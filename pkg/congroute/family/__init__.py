"""Parameter table, legal contracted graphs and the good-family search"""
