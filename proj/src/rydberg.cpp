namespace wiresim {}
