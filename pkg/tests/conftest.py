from hypothesis import settings

# property tests spawn threads and share a noisy host; wall-clock deadlines
# would turn scheduler jitter into spurious failures
settings.register_profile("binsched", deadline=None)
settings.load_profile("binsched")
