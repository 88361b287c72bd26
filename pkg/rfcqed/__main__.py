from rfcqed.main import main

main()
